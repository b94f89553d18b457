#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "coxsde/baselines.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/random.hpp"

namespace coxsde {

bool BridgeReport::mean_ok() const {
  return std::abs(midpoint_mean - expected_midpoint_mean) <= 3.0 * midpoint_mean_se;
}

bool BridgeReport::variance_ok() const {
  return std::abs(midpoint_variance - expected_midpoint_variance) <= 3.0 * midpoint_variance_se;
}

BridgeReport brownian_bridge_decomposition_check(double T, std::size_t M, std::size_t n_paths, std::uint64_t seed,
                                                 double pin, double start) {
  if (M < 100) fail(ErrorCode::InvalidArgument, "the bridge check needs at least 100 steps");
  if (M % 2 != 0) fail(ErrorCode::InvalidArgument, "the bridge check needs an even step count");
  if (n_paths < 2) fail(ErrorCode::InsufficientReplications, "the bridge check needs at least two paths");
  const TimeGrid grid(T, M);
  SdeSpec prior;
  prior.drift = [](double, double) { return 0.0; };
  prior.diffusion = Diffusion::constant(1.0);
  prior.z0 = start;
  prior.floor = kNoFloor;
  const DriftCorrection pull = [pin, T](double z, double t, double, const EventSequence&) {
    return (pin - z) / (T - t);
  };
  const EventSequence none({}, T);

  std::vector<double> mid(n_paths), gap(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    const Trajectory tr = simulate_posterior(prior, pull, none, T, sample_brownian(grid, derive_seed(seed, {i})));
    mid[i] = tr.values[M / 2];
    gap[i] = std::abs(tr.values.back() - pin);
  }
  const double n = static_cast<double>(n_paths);
  double mean = 0.0;
  for (double v : mid) mean += v;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : mid) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double var = m2 / (n - 1.0);
  m4 /= n;
  const double pop_var = m2 / n;

  BridgeReport r;
  r.paths = n_paths;
  r.dt = grid.dt();
  const double tm = grid.node(M / 2);
  r.midpoint_mean = mean;
  r.midpoint_mean_se = std::sqrt(var / n);
  r.expected_midpoint_mean = start + (pin - start) * tm / T;
  r.midpoint_variance = var;
  r.midpoint_variance_se = std::sqrt(std::max(0.0, m4 - pop_var * pop_var) / n);
  r.expected_midpoint_variance = tm * (T - tm) / T;
  std::sort(gap.begin(), gap.end());
  r.terminal_median_gap = n_paths % 2 ? gap[n_paths / 2] : 0.5 * (gap[n_paths / 2 - 1] + gap[n_paths / 2]);
  r.terminal_gap_q99 = gap[std::min(n_paths - 1, static_cast<std::size_t>(std::ceil(0.99 * n)) - 1)];
  r.gap_threshold = 3.0 * std::sqrt(r.dt);
  return r;
}

void write_bridge_report(std::ostream& os, const BridgeReport& r) {
  os << std::setprecision(12);
  os << "quantity,observed,expected,std_error\n";
  os << "midpoint_mean," << r.midpoint_mean << ',' << r.expected_midpoint_mean << ',' << r.midpoint_mean_se << '\n';
  os << "midpoint_variance," << r.midpoint_variance << ',' << r.expected_midpoint_variance << ','
     << r.midpoint_variance_se << '\n';
  os << "terminal_median_gap," << r.terminal_median_gap << ',' << r.gap_threshold << ",\n";
  os << "terminal_gap_q99," << r.terminal_gap_q99 << ",,\n";
}

}  // namespace coxsde
