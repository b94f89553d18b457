#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coxsde/events.hpp"
#include "coxsde/sde.hpp"

namespace coxsde {

/// Safety factor on the thinning bound over the grid maximum.
inline constexpr double kThinningSafety = 0.01;

/// Inhomogeneous Poisson sample with the piecewise-linear interpolant of
/// `intensity` as rate, by thinning a homogeneous process of rate
/// max_j Z_j (1 + kThinningSafety). Horizon is the grid end.
EventSequence sample_cox(const Trajectory& intensity, std::uint64_t seed);

/// sum_{tau_i <= upto} log Z(tau_i) - int_0^upto Z dt (left Riemann sum on
/// the grid, Z(tau) by linear interpolation floored at kPositivityFloor).
/// The unit-rate reference-measure constant is omitted.
double poisson_loglik(const Trajectory& intensity, const EventSequence& events, double upto);

/// Same as above on raw node values; events beyond `upto` are ignored.
double poisson_loglik(const TimeGrid& grid, std::span<const double> values, std::span<const double> events,
                      double from, double upto);

struct BinnedCounts {
  double bin_width = 0.0;
  double origin = 0.0;
  std::vector<std::int64_t> counts;
};

/// Half-open bins [k w, (k+1) w) tiling [0, horizon]; an event exactly at the
/// horizon lands in the last bin.
BinnedCounts bin_counts(const EventSequence& events, double width);

struct CountMoments {
  double delta = 0.0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased across sequences

  double dispersion_index() const { return mean > 0.0 ? variance / mean : 0.0; }
};

/// Across-sequence mean and variance of counts in [at, at + delta).
std::vector<CountMoments> dispersion_curve(std::span<const EventSequence> sequences, std::span<const double> deltas,
                                           double at);

/// Least-squares fit variance(delta) = linear * delta + quadratic * delta^2,
/// with bootstrap standard errors over sequences.
struct DispersionAnalysis {
  std::vector<CountMoments> curve;
  std::vector<double> index_se;  // bootstrap s.e. of variance / mean per delta
  double linear = 0.0;
  double quadratic = 0.0;
  double quadratic_se = 0.0;
};

DispersionAnalysis analyze_dispersion(std::span<const EventSequence> sequences, std::span<const double> deltas,
                                      double at, std::size_t bootstrap_rounds, std::uint64_t seed);

}  // namespace coxsde
