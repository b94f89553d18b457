#include "coxsde/train.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "coxsde/elbo.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/nn/params.hpp"
#include "coxsde/parallel.hpp"
#include "coxsde/random.hpp"

namespace coxsde {

TrainState init_train_state(VariationalModel model, const TrainConfig& cfg) {
  TrainState s;
  nn::AdamConfig ct{cfg.lr_theta, 0.9, 0.999, 1e-8, cfg.clip_norm};
  nn::AdamConfig cb{cfg.lr_beta, 0.9, 0.999, 1e-8, cfg.clip_norm};
  s.adam_theta = nn::AdamState(ct, model.drift.param_count());
  s.adam_beta = nn::AdamState(cb, model.encoder.param_count());
  s.model = std::move(model);
  return s;
}

namespace {

struct Sample {
  ElboGradients g;
  bool ok = false;
};

double pick_horizon(double t_end, bool random, std::uint64_t seed) {
  if (!random) return t_end;
  static constexpr double kFractions[4] = {1.0, 0.75, 0.5, 0.25};
  return t_end * kFractions[mix64(seed) % 4];
}

}  // namespace

void train(TrainState& state, std::span<const EventSequence> data, const TrainConfig& cfg,
           const EpochCallback& on_epoch) {
  if (data.empty()) fail(ErrorCode::InvalidArgument, "training data is empty");
  if (cfg.batch_size == 0 || cfg.mc_paths == 0 || cfg.steps == 0) {
    fail(ErrorCode::InvalidArgument, "batch size, path count and grid steps must be positive");
  }
  const double t_end = data.front().horizon();
  const TimeGrid grid(t_end, cfg.steps);
  const std::size_t n = data.size();
  const std::size_t batch = std::min(cfg.batch_size, n);
  const auto start = std::chrono::steady_clock::now();
  auto out_of_budget = [&] {
    if (cfg.max_updates > 0 && state.updates >= cfg.max_updates) return true;
    if (cfg.time_budget_s > 0.0) {
      const std::chrono::duration<double> el = std::chrono::steady_clock::now() - start;
      if (el.count() >= cfg.time_budget_s) return true;
    }
    return false;
  };

  std::vector<std::size_t> order(n);
  std::vector<Sample> samples(batch);
  std::vector<double> gt(state.model.drift.param_count());
  std::vector<double> gb(state.model.encoder.param_count());

  while (state.epochs_done < cfg.epochs && !out_of_budget()) {
    const std::size_t epoch = state.epochs_done;
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng(derive_seed(cfg.seed, {0x5348ULL, epoch}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    double sum = 0.0, sum_sq = 0.0, norm_t = 0.0, norm_b = 0.0;
    std::size_t counted = 0, batches = 0;
    for (std::size_t b0 = 0; b0 < n && !out_of_budget(); b0 += batch) {
      const std::size_t bn = std::min(batch, n - b0);
      const VariationalModel& model = state.model;
      parallel_for(bn, [&](std::size_t i) {
        const std::size_t idx = order[b0 + i];
        const std::uint64_t s = derive_seed(cfg.seed, {epoch, idx});
        const double h = pick_horizon(t_end, cfg.random_horizon, derive_seed(s, {0x48ULL}));
        const EventSequence ev = h < t_end ? data[idx].truncated(h) : data[idx];
        samples[i].ok = false;
        try {
          samples[i].g = estimate_gradients(model, ev, h, grid, cfg.mc_paths, s);
          samples[i].ok = true;
        } catch (const Error& e) {
          if (!e.is_numerical()) throw;
        }
      });
      std::fill(gt.begin(), gt.end(), 0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      bool ok = true;
      for (std::size_t i = 0; i < bn; ++i) ok = ok && samples[i].ok;
      if (!ok) {
        ++rec.skipped_batches;
        continue;
      }
      // Adam minimizes; the objective is the batch-mean ELBO.
      const double w = -1.0 / static_cast<double>(bn);
      for (std::size_t i = 0; i < bn; ++i) {
        const auto& g = samples[i].g;
        for (std::size_t k = 0; k < gt.size(); ++k) gt[k] += w * g.theta[k];
        for (std::size_t k = 0; k < gb.size(); ++k) gb[k] += w * g.beta[k];
        sum += g.elbo.value;
        sum_sq += g.elbo.value * g.elbo.value;
        ++counted;
      }
      if (!nn::all_finite(gt) || !nn::all_finite(gb)) {
        ++rec.skipped_batches;
        continue;
      }
      const auto it = nn::adam_step(state.adam_theta, state.model.drift.params(), gt);
      std::vector<double> beta = state.model.encoder.params();
      const auto ib = nn::adam_step(state.adam_beta, beta, gb);
      state.model.encoder.set_params(beta);
      norm_t += it.grad_norm;
      norm_b += ib.grad_norm;
      ++batches;
      ++state.updates;
    }
    if (counted > 0) {
      const double c = static_cast<double>(counted);
      rec.elbo_mean = sum / c;
      rec.elbo_se = counted > 1 ? std::sqrt(std::max(0.0, (sum_sq - c * rec.elbo_mean * rec.elbo_mean) / (c - 1.0)) / c)
                                : 0.0;
    }
    if (batches > 0) {
      rec.grad_norm_theta = norm_t / static_cast<double>(batches);
      rec.grad_norm_beta = norm_b / static_cast<double>(batches);
    }
    state.history.push_back(rec);
    ++state.epochs_done;
    if (on_epoch) on_epoch(state);
  }
}

TrainState train(VariationalModel model, std::span<const EventSequence> data, const TrainConfig& cfg) {
  TrainState s = init_train_state(std::move(model), cfg);
  train(s, data, cfg);
  return s;
}

void write_history_csv(std::ostream& os, std::span<const EpochRecord> history) {
  os << "epoch,elbo_mean,elbo_se,grad_norm_theta,grad_norm_beta,skipped_batches\n";
  os << std::setprecision(17);
  for (const auto& r : history) {
    os << r.epoch << ',' << r.elbo_mean << ',' << r.elbo_se << ',' << r.grad_norm_theta << ',' << r.grad_norm_beta
       << ',' << r.skipped_batches << '\n';
  }
}

}  // namespace coxsde
