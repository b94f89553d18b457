#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coxsde/model.hpp"
#include "coxsde/nn/deepsets.hpp"
#include "coxsde/sde.hpp"

namespace coxsde {

/// Z together with the forward sensitivities dZ/dtheta and dZ/dbeta.
struct AugmentedTrajectory {
  Trajectory z;
  std::size_t p = 0;              // drift parameter count
  std::size_t q = 0;              // encoder parameter count
  std::vector<double> j_theta;    // (M + 1) x p, row-major
  std::vector<double> j_beta;     // (M + 1) x q

  std::span<const double> theta_row(std::size_t j) const { return std::span(j_theta).subspan(j * p, p); }
  std::span<const double> beta_row(std::size_t j) const { return std::span(j_beta).subspan(j * q, q); }
};

/// Per-path contribution to the variational objective.
struct PathTerms {
  double loglik = 0.0;  // sum log Z(tau_i) - int_0^T' Z dt
  double kl = 0.0;      // 1/2 int_0^T' u^2 dt
};

/// Simulates the posterior SDE of one observation and, on request, the exact
/// derivative of (loglik - kl) of the Euler scheme with respect to all
/// parameters, by carrying the sensitivity recursion forward in time.
class PathwiseSimulator {
 public:
  PathwiseSimulator(const VariationalModel& model, const EventSequence& events, double horizon, const TimeGrid& grid,
                    bool fused = true);

  /// When `g_theta`/`g_beta` are non-empty, weight * d(loglik - kl)/d(.) is
  /// added to them. `path` (optional) receives the M + 1 node values;
  /// `record` (optional) receives the full augmented trajectory.
  PathTerms run(std::span<const double> increments, std::span<double> g_theta = {}, std::span<double> g_beta = {},
                double weight = 1.0, std::vector<double>* path = nullptr, AugmentedTrajectory* record = nullptr);

  const TimeGrid& grid() const noexcept { return grid_; }

 private:
  const VariationalModel& model_;
  TimeGrid grid_;
  double horizon_;
  std::vector<double> events_;
  nn::EncoderContext ctx_;
  nn::EncoderWorkspace enc_ws_;
  nn::PriorDrift::Workspace drift_ws_;
  std::vector<double> jt_, jt_next_, jb_, jb_next_, db_, gt_, gb_;
};

/// Z, J^theta and J^beta on the grid of `noise` with the shared increments.
AugmentedTrajectory simulate_augmented(const VariationalModel& model, const EventSequence& events, double horizon,
                                       const BrownianPath& noise);

/// Posterior path only (no sensitivities).
Trajectory simulate_model_posterior(const VariationalModel& model, const EventSequence& events, double horizon,
                                    const BrownianPath& noise);

}  // namespace coxsde
