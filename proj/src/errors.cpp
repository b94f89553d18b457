#include "coxsde/errors.hpp"

namespace coxsde {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::HorizonExceedsGrid: return "HorizonExceedsGrid";
    case ErrorCode::EventBeyondHorizon: return "EventBeyondHorizon";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::InsufficientReplications: return "InsufficientReplications";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::DegenerateEstimate: return "DegenerateEstimate";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace coxsde
