#pragma once

#include <cstddef>

namespace coxsde {

/// Uniform grid t_j = j * dt on [0, T] with M steps (M + 1 nodes).
class TimeGrid {
 public:
  TimeGrid() : TimeGrid(1.0, 1) {}
  TimeGrid(double t_end, std::size_t steps);

  double t_end() const noexcept { return t_end_; }
  std::size_t steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return dt_; }

  double node(std::size_t j) const noexcept { return j == steps_ ? t_end_ : static_cast<double>(j) * dt_; }

  struct Location {
    std::size_t index;  // left node, always < steps()
    double weight;      // position inside [t_j, t_{j+1}], in [0, 1]
  };

  /// Interval containing t (clamped to the grid).
  Location locate(double t) const noexcept;

  /// Length of [t_j, t_{j+1}) intersected with [a, b).
  double overlap(std::size_t j, double a, double b) const noexcept;

  bool operator==(const TimeGrid& other) const noexcept {
    return t_end_ == other.t_end_ && steps_ == other.steps_;
  }

 private:
  double t_end_;
  std::size_t steps_;
  double dt_;
};

}  // namespace coxsde
