#include "coxsde/elbo.hpp"

#include <cmath>

#include "coxsde/errors.hpp"
#include "coxsde/pathwise.hpp"
#include "coxsde/random.hpp"

namespace coxsde {
namespace {

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
  double mean(double n) const { return sum / n; }
  double std_error(double n) const {
    if (n < 2.0) return 0.0;
    const double mu = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mu * mu) / (n - 1.0));
    return std::sqrt(var / n);
  }
};

ElboGradients run(const VariationalModel& model, const EventSequence& events, double horizon, const TimeGrid& grid,
                  std::size_t m, std::uint64_t seed, bool grads) {
  if (m == 0) fail(ErrorCode::InvalidArgument, "at least one Monte Carlo path is required");
  PathwiseSimulator sim(model, events, horizon, grid);
  ElboGradients out;
  if (grads) {
    out.theta.assign(model.drift.param_count(), 0.0);
    out.beta.assign(model.encoder.param_count(), 0.0);
  }
  std::vector<double> noise(grid.steps());
  Moments value, lik, kl;
  const double w = 1.0 / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    fill_brownian(derive_seed(seed, {i}), grid.dt(), noise);
    const PathTerms t = sim.run(noise, out.theta, out.beta, w);
    value.add(t.loglik - t.kl);
    lik.add(t.loglik);
    kl.add(t.kl);
  }
  const double n = static_cast<double>(m);
  auto& e = out.elbo;
  e.paths = m;
  e.likelihood_term = lik.mean(n);
  e.kl_term = kl.mean(n);
  e.value = e.likelihood_term - e.kl_term;
  e.mc_std_error = value.std_error(n);
  e.likelihood_std_error = lik.std_error(n);
  e.kl_std_error = kl.std_error(n);
  return out;
}

}  // namespace

ElboEstimate estimate_elbo(const VariationalModel& model, const EventSequence& events, double horizon,
                           const TimeGrid& grid, std::size_t m, std::uint64_t seed) {
  return run(model, events, horizon, grid, m, seed, false).elbo;
}

ElboGradients estimate_gradients(const VariationalModel& model, const EventSequence& events, double horizon,
                                 const TimeGrid& grid, std::size_t m, std::uint64_t seed) {
  return run(model, events, horizon, grid, m, seed, true);
}

}  // namespace coxsde
