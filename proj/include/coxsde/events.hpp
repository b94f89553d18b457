#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace coxsde {

/// Event times 0 < tau_1 < ... < tau_K <= horizon of one Cox observation.
class EventSequence {
 public:
  EventSequence() = default;

  /// Sorts the times; throws InvalidArgument on duplicates or times outside
  /// (0, horizon].
  EventSequence(std::vector<double> times, double horizon);

  std::span<const double> times() const noexcept { return times_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  /// Number of events with tau <= t.
  std::size_t count_upto(double t) const noexcept;

  /// Events with tau <= t, as a sequence with horizon t.
  EventSequence truncated(double t) const;

  /// tau_i - tau_{i-1} with tau_0 = 0.
  double gap(std::size_t i) const noexcept { return times_[i] - (i == 0 ? 0.0 : times_[i - 1]); }

  bool operator==(const EventSequence&) const = default;

 private:
  std::vector<double> times_;
  double horizon_ = 0.0;
};

}  // namespace coxsde
