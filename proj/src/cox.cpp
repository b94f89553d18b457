#include "coxsde/cox.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "coxsde/errors.hpp"
#include "coxsde/random.hpp"

namespace coxsde {

EventSequence sample_cox(const Trajectory& intensity, std::uint64_t seed) {
  const double horizon = intensity.grid.t_end();
  const double peak = *std::max_element(intensity.values.begin(), intensity.values.end());
  const double bound = peak * (1.0 + kThinningSafety);
  if (!(bound > 0.0)) return EventSequence({}, horizon);
  Rng rng = make_rng(seed);
  std::exponential_distribution<double> gap(bound);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> times;
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t > horizon) break;
    if (unif(rng) * bound < intensity.at(t)) {
      if (t > 0.0 && (times.empty() || t > times.back())) times.push_back(t);
    }
  }
  return EventSequence(std::move(times), horizon);
}

double poisson_loglik(const TimeGrid& grid, std::span<const double> values, std::span<const double> events,
                      double from, double upto) {
  double ll = 0.0;
  for (double tau : events) {
    if (tau <= from) continue;
    if (tau > upto) break;
    const auto loc = grid.locate(tau);
    const double z = (1.0 - loc.weight) * values[loc.index] + loc.weight * values[loc.index + 1];
    ll += std::log(std::max(z, kPositivityFloor));
  }
  return ll - riemann_left(grid, values, from, upto);
}

double poisson_loglik(const Trajectory& intensity, const EventSequence& events, double upto) {
  if (upto > intensity.grid.t_end() * (1.0 + 1e-12)) {
    fail(ErrorCode::HorizonExceedsGrid, "likelihood window beyond the grid");
  }
  if (!events.empty() && events.times().back() > upto) {
    fail(ErrorCode::EventBeyondHorizon, "event at " + std::to_string(events.times().back()) + " after " + std::to_string(upto));
  }
  return poisson_loglik(intensity.grid, intensity.values, events.times(), 0.0, upto);
}

BinnedCounts bin_counts(const EventSequence& events, double width) {
  if (!(width > 0.0)) fail(ErrorCode::InvalidArgument, "bin width must be positive");
  const double horizon = events.horizon();
  const auto bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / width - 1e-12)));
  BinnedCounts out{width, 0.0, std::vector<std::int64_t>(bins, 0)};
  for (double tau : events.times()) {
    auto k = static_cast<std::size_t>(std::floor(tau / width));
    out.counts[std::min(k, bins - 1)] += 1;
  }
  return out;
}

namespace {

std::vector<std::int64_t> window_counts(std::span<const EventSequence> sequences, double lo, double hi) {
  std::vector<std::int64_t> counts;
  counts.reserve(sequences.size());
  for (const auto& s : sequences) {
    const auto times = s.times();
    const auto a = std::lower_bound(times.begin(), times.end(), lo);
    const auto b = std::lower_bound(times.begin(), times.end(), hi);
    counts.push_back(b - a);
  }
  return counts;
}

CountMoments moments(std::span<const std::int64_t> counts, std::span<const std::size_t> pick, double delta) {
  const std::size_t n = pick.empty() ? counts.size() : pick.size();
  auto value = [&](std::size_t i) { return static_cast<double>(pick.empty() ? counts[i] : counts[pick[i]]); };
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += value(i);
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) var += (value(i) - mean) * (value(i) - mean);
  var /= static_cast<double>(n - 1);
  return {delta, mean, var};
}

// Least squares on var = a d + b d^2; returns {a, b}.
std::pair<double, double> fit_quadratic(std::span<const CountMoments> curve) {
  double s2 = 0, s3 = 0, s4 = 0, sy1 = 0, sy2 = 0;
  for (const auto& c : curve) {
    const double d = c.delta;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
    sy1 += c.variance * d;
    sy2 += c.variance * d * d;
  }
  const double det = s2 * s4 - s3 * s3;
  return {(sy1 * s4 - sy2 * s3) / det, (s2 * sy2 - s3 * sy1) / det};
}

}  // namespace

std::vector<CountMoments> dispersion_curve(std::span<const EventSequence> sequences, std::span<const double> deltas,
                                           double at) {
  if (sequences.size() < 2) fail(ErrorCode::InsufficientReplications, "need at least two sequences");
  std::vector<CountMoments> out;
  for (double d : deltas) {
    if (!(d > 0.0)) fail(ErrorCode::InvalidArgument, "window width must be positive");
    const auto counts = window_counts(sequences, at, at + d);
    out.push_back(moments(counts, {}, d));
  }
  return out;
}

DispersionAnalysis analyze_dispersion(std::span<const EventSequence> sequences, std::span<const double> deltas,
                                      double at, std::size_t bootstrap_rounds, std::uint64_t seed) {
  if (deltas.size() < 2) fail(ErrorCode::InvalidArgument, "quadratic fit needs at least two window widths");
  DispersionAnalysis out;
  out.curve = dispersion_curve(sequences, deltas, at);
  std::tie(out.linear, out.quadratic) = fit_quadratic(out.curve);

  std::vector<std::vector<std::int64_t>> counts;
  for (double d : deltas) counts.push_back(window_counts(sequences, at, at + d));

  const std::size_t n = sequences.size();
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(n);
  std::vector<double> quad(bootstrap_rounds);
  std::vector<std::vector<double>> ratio(deltas.size(), std::vector<double>(bootstrap_rounds));
  std::vector<CountMoments> curve(deltas.size());
  for (std::size_t b = 0; b < bootstrap_rounds; ++b) {
    for (auto& i : idx) i = pick(rng);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      curve[k] = moments(counts[k], idx, deltas[k]);
      ratio[k][b] = curve[k].dispersion_index();
    }
    quad[b] = fit_quadratic(curve).second;
  }
  auto sd = [](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };
  out.quadratic_se = sd(quad);
  for (const auto& r : ratio) out.index_se.push_back(sd(r));
  return out;
}

}  // namespace coxsde
