#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "coxsde/ensemble.hpp"
#include "coxsde/events.hpp"
#include "coxsde/nn/adam.hpp"
#include "coxsde/nn/drift.hpp"
#include "coxsde/sde.hpp"

namespace coxsde {

// ---------------------------------------------------------------------------
// Metropolis-Hastings on the driving noise

struct MhConfig {
  std::size_t n_steps = 20000;
  std::size_t burn_in = 10000;
  double rho = 0.2;           // initial pCN step
  bool adapt = true;          // tune rho towards target_accept during burn-in
  double target_accept = 0.25;
  std::size_t thin = 10;
  std::size_t window = 100;   // acceptance-rate window for diagnostics and tuning
  std::uint64_t seed = 0;
};

struct MhDiagnostics {
  std::vector<double> loglik;              // per step, after the accept/reject
  std::vector<double> accept_rate_window;  // per step
  double burn_in_acceptance = 0.0;
  double acceptance = 0.0;                 // after burn-in
  double final_rho = 0.0;
  bool zero_acceptance = false;            // burn-in acceptance below 0.5%
};

struct MhResult {
  PathEnsemble ensemble;                   // post burn-in states every `thin` steps
  MhDiagnostics diagnostics;
  std::vector<double> state;               // final increments
};

/// Log-likelihood of a path given its node values.
using PathLogLik = std::function<double(std::span<const double> path)>;

/// pCN chain: dB' = sqrt(1 - rho^2) dB + rho xi, mapped through Euler to a
/// path and accepted with probability min(1, exp(loglik' - loglik)).
/// `init` (optional) is the starting increment vector; otherwise a prior draw.
MhResult mh_sampler(const SdeSpec& prior, const TimeGrid& grid, const PathLogLik& loglik, const MhConfig& cfg,
                    std::span<const double> init = {});

/// Posterior of the latent intensity given events on [0, T'].
MhResult mh_posterior_sampler(const SdeSpec& prior, const EventSequence& events, double horizon, const TimeGrid& grid,
                              const MhConfig& cfg, std::span<const double> init = {});

void write_chain_csv(std::ostream& os, const MhDiagnostics& d);

// ---------------------------------------------------------------------------
// Monte Carlo estimate of the exact posterior drift correction

struct McCorrection {
  double h = 0.0;          // d/dz log E[exp(-int_t^T' Z) prod Z(tau_i) | Z_t = z]
  double h_std_error = 0.0;
  double drift = 0.0;      // sigma(z)^2 h, the extra drift
  double u = 0.0;          // sigma(z) h, the same in Brownian units
};

/// Nested Monte Carlo with n_inner prior paths from (t, z) on steps of the
/// outer grid's dt, common random numbers at z +- h_z and a central
/// difference with h_z = max(1e-3, 1e-3 z), capped at z / 2.
McCorrection mc_drift_correction(const SdeSpec& prior, const TimeGrid& grid, double z, double t, double horizon,
                                 const EventSequence& events, std::size_t n_inner, std::uint64_t seed);

/// Drift correction callable for simulate_posterior; the inner seed is
/// derived from (seed, t, z).
DriftCorrection make_mc_correction(const SdeSpec& prior, const TimeGrid& grid, std::size_t n_inner,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// Approximate EM for the prior drift

struct EmConfig {
  std::size_t iterations = 20;
  std::size_t initial_burn_in = 2000;   // first E-step per observation
  std::size_t estep_steps = 200;        // later E-steps per observation
  std::size_t samples_per_obs = 10;     // kept paths per observation
  double rho = 0.2;
  std::size_t mstep_steps = 50;
  std::size_t mstep_batch = 32;         // observations per M-step update (0 = all)
  double lr = 0.005;
  double clip_norm = 5.0;
  enum class Optimizer { Adam, Sgd } optimizer = Optimizer::Adam;
  std::size_t steps = 100;              // grid steps
  std::uint64_t seed = 0;
  double time_budget_s = 0.0;           // 0 = no limit
};

struct EmRecord {
  std::size_t iteration = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double acceptance = 0.0;
};

struct EmResult {
  nn::PriorDrift drift;
  std::vector<EmRecord> history;
};

/// Girsanov M-step objective on fixed paths (rows of `paths`, all on `grid`):
///   mean over paths of sum_j [b_j dZ_j - b_j^2 dt / 2] / sigma_j^2.
/// When `grad` is non-empty the gradient with respect to the drift
/// parameters is written to it.
double mstep_objective(const nn::PriorDrift& drift, const Diffusion& diffusion, const TimeGrid& grid,
                       std::span<const double> paths, std::size_t n_paths, std::span<double> grad);

EmResult em_fit(std::span<const EventSequence> data, nn::PriorDrift init, const Diffusion& diffusion, double z0,
                const EmConfig& cfg);

// ---------------------------------------------------------------------------
// Brownian bridge as a conditioned diffusion

struct BridgeReport {
  std::size_t paths = 0;
  double dt = 0.0;
  double midpoint_mean = 0.0;
  double midpoint_mean_se = 0.0;
  double expected_midpoint_mean = 0.0;
  double midpoint_variance = 0.0;
  double midpoint_variance_se = 0.0;
  double expected_midpoint_variance = 0.0;
  double terminal_median_gap = 0.0;
  double gap_threshold = 0.0;   // 3 sqrt(dt)
  double terminal_gap_q99 = 0.0;

  bool mean_ok() const;
  bool variance_ok() const;
  bool pinned() const { return terminal_median_gap < gap_threshold; }
};

/// Simulates dZ = (x - Z) / (T - t) dt + dB from `start` and compares the
/// midpoint law and the terminal gap with the bridge values.
BridgeReport brownian_bridge_decomposition_check(double T, std::size_t M, std::size_t n_paths, std::uint64_t seed,
                                                 double pin = 0.0, double start = 0.0);

void write_bridge_report(std::ostream& os, const BridgeReport& r);

}  // namespace coxsde
