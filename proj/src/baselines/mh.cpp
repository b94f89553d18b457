#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include "coxsde/baselines.hpp"
#include "coxsde/cox.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/random.hpp"

namespace coxsde {
namespace {

double path_loglik(const SdeSpec& prior, const TimeGrid& grid, const PathLogLik& loglik, std::span<const double> x,
                   std::span<double> path) {
  try {
    euler_path(prior, grid, x, path);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonFiniteState) return -std::numeric_limits<double>::infinity();
    throw;
  }
  return loglik(path);
}

}  // namespace

MhResult mh_sampler(const SdeSpec& prior, const TimeGrid& grid, const PathLogLik& loglik, const MhConfig& cfg,
                    std::span<const double> init) {
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) fail(ErrorCode::InvalidArgument, "pCN step must lie in (0, 1)");
  if (cfg.burn_in >= cfg.n_steps) fail(ErrorCode::InvalidArgument, "burn-in must be shorter than the chain");
  if (cfg.thin == 0 || cfg.window == 0) fail(ErrorCode::InvalidArgument, "thinning stride and window must be positive");
  const std::size_t m = grid.steps();
  const std::size_t nodes = grid.size();
  Rng rng = make_rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<double> x(m), prop(m), path(nodes), prop_path(nodes);
  if (init.empty()) {
    for (double& v : x) v = normal(rng);
  } else {
    if (init.size() != m) fail(ErrorCode::GridMismatch, "initial increments do not match the grid");
    std::copy(init.begin(), init.end(), x.begin());
  }
  double ll = path_loglik(prior, grid, loglik, x, path);
  if (!std::isfinite(ll)) fail(ErrorCode::DegenerateEstimate, "chain started at a path with zero likelihood");

  MhResult out;
  const std::size_t kept = (cfg.n_steps - cfg.burn_in) / cfg.thin;
  out.ensemble = PathEnsemble{grid, 0, {}, EnsembleSource::Mcmc};
  out.ensemble.values.reserve(kept * nodes);
  auto& diag = out.diagnostics;
  diag.loglik.reserve(cfg.n_steps);
  diag.accept_rate_window.reserve(cfg.n_steps);

  double rho = cfg.rho;
  std::deque<char> window;
  std::size_t window_accepts = 0, burn_accepts = 0, post_accepts = 0;
  for (std::size_t step = 0; step < cfg.n_steps; ++step) {
    const double keep = std::sqrt(1.0 - rho * rho);
    for (std::size_t j = 0; j < m; ++j) prop[j] = keep * x[j] + rho * normal(rng);
    const double u = unif(rng);
    const double lp = path_loglik(prior, grid, loglik, prop, prop_path);
    const bool accept = std::isfinite(lp) && std::log(u) < lp - ll;
    if (accept) {
      std::swap(x, prop);
      std::swap(path, prop_path);
      ll = lp;
    }
    window.push_back(accept ? 1 : 0);
    window_accepts += accept ? 1 : 0;
    if (window.size() > cfg.window) {
      window_accepts -= static_cast<std::size_t>(window.front());
      window.pop_front();
    }
    const double rate = static_cast<double>(window_accepts) / static_cast<double>(window.size());
    diag.loglik.push_back(ll);
    diag.accept_rate_window.push_back(rate);

    if (step < cfg.burn_in) {
      burn_accepts += accept ? 1 : 0;
      if (cfg.adapt && (step + 1) % cfg.window == 0) {
        rho = std::clamp(rho * std::exp(2.0 * (rate - cfg.target_accept)), 1e-4, 0.99);
      }
    } else {
      post_accepts += accept ? 1 : 0;
      if ((step - cfg.burn_in + 1) % cfg.thin == 0) {
        out.ensemble.values.insert(out.ensemble.values.end(), path.begin(), path.end());
        ++out.ensemble.n;
      }
    }
  }
  diag.burn_in_acceptance = cfg.burn_in > 0 ? static_cast<double>(burn_accepts) / static_cast<double>(cfg.burn_in) : 0.0;
  diag.acceptance = static_cast<double>(post_accepts) / static_cast<double>(cfg.n_steps - cfg.burn_in);
  diag.final_rho = rho;
  diag.zero_acceptance = cfg.burn_in > 0 && diag.burn_in_acceptance < 0.005;
  out.state = std::move(x);
  return out;
}

MhResult mh_posterior_sampler(const SdeSpec& prior, const EventSequence& events, double horizon, const TimeGrid& grid,
                              const MhConfig& cfg, std::span<const double> init) {
  if (horizon > grid.t_end() * (1.0 + 1e-12)) fail(ErrorCode::HorizonExceedsGrid, "horizon beyond grid end");
  if (!events.empty() && events.times().back() > horizon) {
    fail(ErrorCode::EventBeyondHorizon, "events recorded after the conditioning horizon");
  }
  const auto times = events.times();
  PathLogLik ll = [&grid, times, horizon](std::span<const double> path) {
    return poisson_loglik(grid, path, times, 0.0, horizon);
  };
  return mh_sampler(prior, grid, ll, cfg, init);
}

void write_chain_csv(std::ostream& os, const MhDiagnostics& d) {
  os << "step,loglik,accept_rate_window\n" << std::setprecision(17);
  for (std::size_t i = 0; i < d.loglik.size(); ++i) os << i << ',' << d.loglik[i] << ',' << d.accept_rate_window[i] << '\n';
}

}  // namespace coxsde
