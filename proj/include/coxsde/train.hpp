#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "coxsde/events.hpp"
#include "coxsde/model.hpp"
#include "coxsde/nn/adam.hpp"

namespace coxsde {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t mc_paths = 10;
  double lr_theta = 0.005;
  double lr_beta = 0.005;
  double clip_norm = 5.0;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  /// Draw T' from {T, 3T/4, T/2, T/4} per sample and epoch instead of T' = T.
  bool random_horizon = false;
  /// Stop after this many optimizer updates (0 = no limit).
  std::size_t max_updates = 0;
  /// Stop once this much wall-clock time has passed (0 = no limit). Runs
  /// limited this way are not reproducible.
  double time_budget_s = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double elbo_mean = 0.0;
  double elbo_se = 0.0;
  double grad_norm_theta = 0.0;
  double grad_norm_beta = 0.0;
  std::size_t skipped_batches = 0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainState {
  VariationalModel model;
  nn::AdamState adam_theta;
  nn::AdamState adam_beta;
  std::size_t epochs_done = 0;
  std::size_t updates = 0;
  std::vector<EpochRecord> history;

  bool operator==(const TrainState&) const = default;
};

TrainState init_train_state(VariationalModel model, const TrainConfig& cfg);

using EpochCallback = std::function<void(const TrainState&)>;

/// Adam ascent on the batch-mean ELBO over (theta, beta). Continues from
/// `state` (so a checkpoint can be resumed) until cfg.epochs epochs are
/// complete or a budget runs out. Batches whose gradient is non-finite are
/// skipped and counted.
void train(TrainState& state, std::span<const EventSequence> data, const TrainConfig& cfg,
           const EpochCallback& on_epoch = {});

/// Convenience wrapper starting from `model`.
TrainState train(VariationalModel model, std::span<const EventSequence> data, const TrainConfig& cfg);

void write_history_csv(std::ostream& os, std::span<const EpochRecord> history);

}  // namespace coxsde
