#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "coxsde/baselines.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/nn/params.hpp"
#include "coxsde/parallel.hpp"
#include "coxsde/random.hpp"

namespace coxsde {

double mstep_objective(const nn::PriorDrift& drift, const Diffusion& diffusion, const TimeGrid& grid,
                       std::span<const double> paths, std::size_t n_paths, std::span<double> grad) {
  const std::size_t nodes = grid.size();
  if (paths.size() != n_paths * nodes) fail(ErrorCode::GridMismatch, "path matrix does not match the grid");
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  if (n_paths == 0) return 0.0;
  const double dt = grid.dt();
  const double inv_n = 1.0 / static_cast<double>(n_paths);
  auto ws = drift.make_workspace();
  double total = 0.0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const double* z = paths.data() + i * nodes;
    for (std::size_t j = 0; j < grid.steps(); ++j) {
      const double t = grid.node(j);
      const double s = diffusion.value(z[j]);
      const double inv_var = 1.0 / std::max(s * s, kPositivityFloor);
      const double dz = z[j + 1] - z[j];
      const double b = drift.value(z[j], t, ws);
      total += (b * dz - 0.5 * b * b * dt) * inv_var;
      if (!grad.empty()) drift.accumulate_param_grad(z[j], t, (dz - b * dt) * inv_var * inv_n, grad, ws);
    }
  }
  return total * inv_n;
}

EmResult em_fit(std::span<const EventSequence> data, nn::PriorDrift init, const Diffusion& diffusion, double z0,
                const EmConfig& cfg) {
  if (data.empty()) fail(ErrorCode::InvalidArgument, "EM needs at least one observation");
  if (cfg.samples_per_obs == 0 || cfg.steps == 0) fail(ErrorCode::InvalidArgument, "EM budgets must be positive");
  const auto start = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    if (cfg.time_budget_s <= 0.0) return false;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= cfg.time_budget_s;
  };
  const TimeGrid grid(data.front().horizon(), cfg.steps);
  const std::size_t n = data.size();
  const std::size_t nodes = grid.size();
  const std::size_t kept = cfg.samples_per_obs;
  constexpr std::size_t kThin = 10;

  EmResult res{std::move(init), {}};
  nn::AdamState adam(nn::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8, cfg.clip_norm}, res.drift.param_count());
  std::vector<std::vector<double>> chains(n);
  std::vector<double> rhos(n, cfg.rho);
  std::vector<double> accept(n, 0.0);
  std::vector<double> paths(n * kept * nodes);
  std::vector<double> grad(res.drift.param_count());
  std::vector<double> batch_paths;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = cfg.mstep_batch == 0 ? n : std::min(cfg.mstep_batch, n);
  std::size_t cursor = n;

  for (std::size_t it = 0; it < cfg.iterations && !out_of_time(); ++it) {
    const SdeSpec prior = res.drift.to_sde(diffusion, z0);
    const std::size_t burn = it == 0 ? cfg.initial_burn_in : cfg.estep_steps;
    parallel_for(n, [&](std::size_t i) {
      MhConfig mh;
      mh.burn_in = burn;
      mh.n_steps = burn + kept * kThin;
      mh.thin = kThin;
      mh.rho = rhos[i];
      mh.adapt = burn > 0;
      mh.seed = derive_seed(cfg.seed, {it, i});
      const MhResult r = mh_posterior_sampler(prior, data[i], data[i].horizon(), grid, mh, chains[i]);
      chains[i] = r.state;
      rhos[i] = r.diagnostics.final_rho;
      accept[i] = r.diagnostics.acceptance;
      std::copy(r.ensemble.values.begin(), r.ensemble.values.end(),
                paths.begin() + static_cast<std::ptrdiff_t>(i * kept * nodes));
    });

    EmRecord rec;
    rec.iteration = it;
    rec.acceptance = std::accumulate(accept.begin(), accept.end(), 0.0) / static_cast<double>(n);
    for (std::size_t s = 0; s < cfg.mstep_steps; ++s) {
      batch_paths.clear();
      for (std::size_t b = 0; b < batch; ++b) {
        if (cursor == n) {
          Rng rng = make_rng(derive_seed(cfg.seed, {0x454dULL, it, s}));
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        const std::size_t i = order[cursor++];
        const auto first = paths.begin() + static_cast<std::ptrdiff_t>(i * kept * nodes);
        batch_paths.insert(batch_paths.end(), first, first + static_cast<std::ptrdiff_t>(kept * nodes));
      }
      const double obj = mstep_objective(res.drift, diffusion, grid, batch_paths, batch * kept, grad);
      rec.objective = obj;
      rec.grad_norm = nn::l2_norm(grad);
      if (!nn::all_finite(grad)) fail(ErrorCode::NonFiniteGradient, "M-step gradient is not finite");
      auto params = res.drift.params();
      if (cfg.optimizer == EmConfig::Optimizer::Adam) {
        for (double& g : grad) g = -g;
        nn::adam_step(adam, params, grad);
      } else {
        const double scale = cfg.clip_norm > 0.0 && rec.grad_norm > cfg.clip_norm ? cfg.clip_norm / rec.grad_norm : 1.0;
        for (std::size_t k = 0; k < params.size(); ++k) params[k] += cfg.lr * scale * grad[k];
      }
    }
    res.history.push_back(rec);
  }
  return res;
}

}  // namespace coxsde
