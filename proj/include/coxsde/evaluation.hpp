#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "coxsde/baselines.hpp"
#include "coxsde/ensemble.hpp"
#include "coxsde/model.hpp"
#include "coxsde/sde.hpp"
#include "coxsde/train.hpp"

namespace coxsde {

/// sqrt(sum_{j < M} dt (a_j - b_j)^2).
double path_l2_distance(const Trajectory& a, const Trajectory& b);
double path_l2_distance(const TimeGrid& grid, std::span<const double> a, std::span<const double> b);

struct AssignmentResult {
  std::vector<std::size_t> permutation;  // row i is matched to column permutation[i]
  double cost = 0.0;                     // total cost of the matching
};

/// Minimum-cost perfect matching of a square cost matrix (row-major, n x n).
AssignmentResult hungarian(std::span<const double> cost, std::size_t n);

/// Empirical 2-Wasserstein distance between equal-size path ensembles:
/// sqrt of the mean squared path distance under the optimal matching. The
/// returned `cost` is that distance.
AssignmentResult wasserstein2(const PathEnsemble& mu, const PathEnsemble& nu);

/// Mean over n_paths common Brownian paths of int_0^T (Z^learned - Z^truth)^2 dt
/// (left Riemann sum).
double prior_l2_deviation(const SdeSpec& learned, const SdeSpec& truth, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Amortization gap

struct GapProtocol {
  SdeSpec truth = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  double horizon = 4.0;
  std::size_t steps = 100;
  std::size_t test_size = 16;
  std::size_t eval_train = 16;      // training observations scored (at most n)
  std::size_t ensemble = 64;        // paths per posterior ensemble (both methods)
  MhConfig mcmc;                    // oracle chains (ensemble = kept states)
  ModelConfig model;
  TrainConfig train;                // epochs ignored when updates > 0
  std::size_t updates = 400;        // optimizer updates per training size
  std::uint64_t seed = 0;
};

struct GapRow {
  std::size_t n = 0;
  double train_w = 0.0;
  double train_se = 0.0;
  double test_w = 0.0;
  double test_se = 0.0;
  double gap() const { return test_w - train_w; }
  double gap_se() const;
};

std::vector<GapRow> amortization_gap_study(std::span<const std::size_t> train_sizes, const GapProtocol& protocol);

void write_gap_csv(std::ostream& os, std::span<const GapRow> rows);

// ---------------------------------------------------------------------------
// Timing at matched predictive likelihood

struct TimingRow {
  std::string horizon;        // "[0,T]" style label
  double condition_until = 0.0;
  double predictive_ll = 0.0;
  std::string method;
  double wall_clock_s = 0.0;
  std::size_t mcmc_steps = 0;  // chain length used (0 for amortized)
};

struct TimingProtocol {
  std::size_t paths = 32;
  std::size_t steps = 100;
  std::vector<std::size_t> mcmc_budgets = {200, 500, 1000, 2000, 5000, 10000, 20000};
  double match_tolerance = 0.05;
  MhConfig mcmc;  // n_steps / burn_in overridden per budget
  std::uint64_t seed = 0;
};

/// For every horizon fraction f: VI conditions on [0, fT] (the full window
/// when f = 0 conditions on [0, T]) and predicts the remaining window; MCMC
/// with the learned prior is run with the smallest budget whose predictive
/// log-likelihood is within the tolerance of VI's.
std::vector<TimingRow> timing_harness(const VariationalModel& model, std::span<const EventSequence> test,
                                      std::span<const double> horizon_fractions, const TimingProtocol& protocol);

void write_timing_csv(std::ostream& os, std::span<const TimingRow> rows);

struct DeviationRow {
  std::string drift_name;
  std::string method;
  double l2_deviation = 0.0;
};

void write_deviation_csv(std::ostream& os, std::span<const DeviationRow> rows);

}  // namespace coxsde
