#include "coxsde/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coxsde/errors.hpp"

namespace coxsde {

TimeGrid::TimeGrid(double t_end, std::size_t steps) : t_end_(t_end), steps_(steps), dt_(0.0) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) fail(ErrorCode::InvalidArgument, "grid end must be positive and finite");
  if (steps == 0) fail(ErrorCode::InvalidArgument, "grid needs at least one step");
  dt_ = t_end / static_cast<double>(steps);
}

TimeGrid::Location TimeGrid::locate(double t) const noexcept {
  if (t <= 0.0) return {0, 0.0};
  if (t >= t_end_) return {steps_ - 1, 1.0};
  auto j = static_cast<std::size_t>(std::floor(t / dt_));
  j = std::min(j, steps_ - 1);
  const double w = (t - node(j)) / (node(j + 1) - node(j));
  return {j, std::clamp(w, 0.0, 1.0)};
}

double TimeGrid::overlap(std::size_t j, double a, double b) const noexcept {
  const double lo = std::max(node(j), a);
  const double hi = std::min(node(j + 1), b);
  return hi > lo ? hi - lo : 0.0;
}

}  // namespace coxsde
