#include "coxsde/events.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coxsde/errors.hpp"

namespace coxsde {

EventSequence::EventSequence(std::vector<double> times, double horizon)
    : times_(std::move(times)), horizon_(horizon) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) fail(ErrorCode::InvalidArgument, "horizon must be finite and >= 0");
  std::sort(times_.begin(), times_.end());
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double t = times_[i];
    if (!(t > 0.0) || t > horizon) {
      fail(ErrorCode::InvalidArgument, "event time " + std::to_string(t) + " outside (0, " + std::to_string(horizon) + "]");
    }
    if (i > 0 && t == times_[i - 1]) fail(ErrorCode::InvalidArgument, "duplicate event time " + std::to_string(t));
  }
}

std::size_t EventSequence::count_upto(double t) const noexcept {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

EventSequence EventSequence::truncated(double t) const {
  EventSequence out;
  out.times_.assign(times_.begin(), times_.begin() + static_cast<std::ptrdiff_t>(count_upto(t)));
  out.horizon_ = t;
  return out;
}

}  // namespace coxsde
