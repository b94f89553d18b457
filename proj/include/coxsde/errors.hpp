#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coxsde {

enum class ErrorCode {
  InvalidArgument,
  NonFiniteState,
  HorizonExceedsGrid,
  EventBeyondHorizon,
  ShapeMismatch,
  NonFiniteGradient,
  InsufficientReplications,
  EmptyEnsemble,
  DegenerateEstimate,
  GridMismatch,
  SizeMismatch,
  ConfigError,
  IoError,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// True for failures caused by numerical blow-up rather than bad input.
  bool is_numerical() const noexcept {
    return code_ == ErrorCode::NonFiniteState || code_ == ErrorCode::NonFiniteGradient ||
           code_ == ErrorCode::DegenerateEstimate;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace coxsde
