#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "coxsde/baselines.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/random.hpp"

namespace coxsde {
namespace {

// log[exp(-int_t^T' Z ds) prod Z(tau)] along one Euler path started at z.
double inner_log_weight(const SdeSpec& prior, double z, double t, double dts, std::size_t steps,
                        std::span<const double> noise, std::span<const double> events) {
  double lw = 0.0;
  std::size_t e = 0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double s = t + static_cast<double>(k) * dts;
    double next = z + prior.drift(z, s) * dts + prior.diffusion.value(z) * noise[k];
    if (!std::isfinite(next)) fail(ErrorCode::NonFiniteState, "inner path became non-finite");
    next = std::max(next, prior.floor);
    lw -= z * dts;
    const double s_next = k + 1 == steps ? t + static_cast<double>(steps) * dts : s + dts;
    while (e < events.size() && events[e] <= s_next) {
      const double lam = std::clamp((events[e] - s) / dts, 0.0, 1.0);
      lw += std::log(std::max((1.0 - lam) * z + lam * next, kPositivityFloor));
      ++e;
    }
    z = next;
  }
  return lw;
}

}  // namespace

McCorrection mc_drift_correction(const SdeSpec& prior, const TimeGrid& grid, double z, double t, double horizon,
                                 const EventSequence& events, std::size_t n_inner, std::uint64_t seed) {
  if (!(t < horizon)) fail(ErrorCode::InvalidArgument, "the correction is only defined before the horizon");
  if (n_inner < 100) fail(ErrorCode::InvalidArgument, "at least 100 inner paths are required");
  const double span = horizon - t;
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::round(span / grid.dt())));
  const double dts = span / static_cast<double>(steps);

  const auto all = events.times();
  const auto first = std::upper_bound(all.begin(), all.end(), t);
  const auto last = std::upper_bound(first, all.end(), horizon);
  const std::span<const double> future(first, last);

  const double hz = std::min(std::max(1e-3, 1e-3 * z), 0.5 * z);
  std::vector<double> noise(steps), lp(n_inner), lm(n_inner);
  for (std::size_t i = 0; i < n_inner; ++i) {
    fill_brownian(derive_seed(seed, {i}), dts, noise);
    lp[i] = inner_log_weight(prior, z + hz, t, dts, steps, noise, future);
    lm[i] = inner_log_weight(prior, z - hz, t, dts, steps, noise, future);
  }
  const double mp = *std::max_element(lp.begin(), lp.end());
  const double mm = *std::max_element(lm.begin(), lm.end());
  double sp = 0.0, sm = 0.0;
  for (std::size_t i = 0; i < n_inner; ++i) {
    lp[i] = std::exp(lp[i] - mp);
    lm[i] = std::exp(lm[i] - mm);
    sp += lp[i];
    sm += lm[i];
  }
  const double n = static_cast<double>(n_inner);
  if (!(sp > 0.0) || !(sm > 0.0) || !std::isfinite(mp) || !std::isfinite(mm)) {
    fail(ErrorCode::DegenerateEstimate, "inner Monte Carlo mean underflowed");
  }
  const double mean_p = sp / n, mean_m = sm / n;
  McCorrection out;
  out.h = ((std::log(mean_p) + mp) - (std::log(mean_m) + mm)) / (2.0 * hz);
  // Delta method on the paired ratio of means.
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n_inner; ++i) {
    const double d = lp[i] / mean_p - lm[i] / mean_m;
    s1 += d;
    s2 += d * d;
  }
  const double var = std::max(0.0, (s2 - s1 * s1 / n) / (n - 1.0));
  out.h_std_error = std::sqrt(var / n) / (2.0 * hz);
  const double sigma = prior.diffusion.value(z);
  out.u = sigma * out.h;
  out.drift = sigma * sigma * out.h;
  return out;
}

DriftCorrection make_mc_correction(const SdeSpec& prior, const TimeGrid& grid, std::size_t n_inner,
                                   std::uint64_t seed) {
  return [prior, grid, n_inner, seed](double z, double t, double horizon, const EventSequence& events) {
    const std::uint64_t s = derive_seed(seed, {std::bit_cast<std::uint64_t>(t), std::bit_cast<std::uint64_t>(z)});
    return mc_drift_correction(prior, grid, z, t, horizon, events, n_inner, s).u;
  };
}

}  // namespace coxsde
