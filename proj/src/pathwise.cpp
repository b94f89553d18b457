#include "coxsde/pathwise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coxsde/errors.hpp"
#include "coxsde/simd/kernels.hpp"

namespace coxsde {

PathwiseSimulator::PathwiseSimulator(const VariationalModel& model, const EventSequence& events, double horizon,
                                     const TimeGrid& grid, bool fused)
    : model_(model),
      grid_(grid),
      horizon_(horizon),
      events_(events.times().begin(), events.times().end()),
      ctx_(model.encoder, events, horizon, fused),
      enc_ws_(model.encoder.make_workspace()),
      drift_ws_(model.drift.make_workspace()) {
  if (horizon > grid.t_end() * (1.0 + 1e-12)) {
    fail(ErrorCode::HorizonExceedsGrid, "horizon " + std::to_string(horizon) + " beyond grid end");
  }
  if (!events_.empty() && events_.back() > horizon) {
    fail(ErrorCode::EventBeyondHorizon, "events recorded after the conditioning horizon");
  }
}

PathTerms PathwiseSimulator::run(std::span<const double> increments, std::span<double> g_theta,
                                 std::span<double> g_beta, double weight, std::vector<double>* path,
                                 AugmentedTrajectory* record) {
  const std::size_t steps = grid_.steps();
  if (increments.size() != steps) fail(ErrorCode::GridMismatch, "increment count does not match the grid");
  const bool grads = !g_theta.empty() || !g_beta.empty() || record != nullptr;
  const auto& k = simd::kernels();
  const auto& drift = model_.drift;
  const auto& enc = model_.encoder;
  const auto& diff = model_.diffusion;
  const std::size_t p = drift.param_count();
  const std::size_t q = enc.param_count();
  const double dt = grid_.dt();
  const double floor = kPositivityFloor;

  if (grads) {
    jt_.assign(p, 0.0);
    jt_next_.assign(p, 0.0);
    jb_.assign(q, 0.0);
    jb_next_.assign(q, 0.0);
    gt_.assign(p, 0.0);
    gb_.assign(q, 0.0);
  }
  if (path) path->assign(grid_.size(), 0.0);
  if (record) {
    record->z = Trajectory{grid_, std::vector<double>(grid_.size())};
    record->p = p;
    record->q = q;
    record->j_theta.assign(grid_.size() * p, 0.0);
    record->j_beta.assign(grid_.size() * q, 0.0);
  }

  PathTerms terms;
  double z = model_.z0;
  std::size_t e = 0;
  for (std::size_t j = 0; j < steps; ++j) {
    const double t = grid_.node(j);
    const double t_next = grid_.node(j + 1);
    if (path) (*path)[j] = z;
    if (record) {
      record->z.values[j] = z;
      std::copy(jt_.begin(), jt_.end(), record->j_theta.begin() + static_cast<std::ptrdiff_t>(j * p));
      std::copy(jb_.begin(), jb_.end(), record->j_beta.begin() + static_cast<std::ptrdiff_t>(j * q));
    }
    const double sigma = diff.value(z);
    const bool active = t < horizon_;
    const double w = grid_.overlap(j, 0.0, horizon_);

    double b;
    double b_z = 0.0;
    double u = 0.0;
    double u_z = 0.0;
    if (grads) {
      // Drift parameter derivatives land directly in jt_next_, then the
      // recursion J' = A J + dt db is formed in place.
      b = drift.value_and_grads(z, t, b_z, jt_next_, drift_ws_);
      if (active) {
        const auto v = enc.evaluate(ctx_, z, t, diff, jb_next_, enc_ws_);
        u = v.u;
        u_z = v.du_dz;
      } else {
        std::fill(jb_next_.begin(), jb_next_.end(), 0.0);
      }
    } else {
      b = drift.value(z, t, drift_ws_);
      if (active) u = enc.evaluate(ctx_, z, t, diff, {}, enc_ws_).u;
    }

    terms.loglik -= w * z;
    if (active) terms.kl += 0.5 * u * u * dt;

    if (grads) {
      const double c = -w - (active ? dt * u * u_z : 0.0);
      k.axpy(c, jt_.data(), gt_.data(), p);
      k.axpy(c, jb_.data(), gb_.data(), q);
      if (active) k.axpy(-dt * u, jb_next_.data(), gb_.data(), q);
    }

    const double dB = increments[j];
    double z_next = z + (b + sigma * u) * dt + sigma * dB;
    if (!std::isfinite(z_next)) {
      fail(ErrorCode::NonFiniteState, "state became non-finite at step " + std::to_string(j));
    }
    const bool clamped = z_next < floor;
    if (clamped) z_next = floor;

    if (grads) {
      const double a = 1.0 + (b_z + diff.dz(z) * u + sigma * u_z) * dt + diff.dz(z) * dB;
      if (clamped) {
        std::fill(jt_next_.begin(), jt_next_.end(), 0.0);
        std::fill(jb_next_.begin(), jb_next_.end(), 0.0);
      } else {
        k.axpby(a, jt_.data(), dt, jt_next_.data(), p);
        k.axpby(a, jb_.data(), sigma * dt, jb_next_.data(), q);
      }
    }

    while (e < events_.size() && events_[e] <= t_next) {
      const double lam = (events_[e] - t) / (t_next - t);
      const double zt = (1.0 - lam) * z + lam * z_next;
      if (zt > floor) {
        terms.loglik += std::log(zt);
        if (grads) {
          k.axpy((1.0 - lam) / zt, jt_.data(), gt_.data(), p);
          k.axpy(lam / zt, jt_next_.data(), gt_.data(), p);
          k.axpy((1.0 - lam) / zt, jb_.data(), gb_.data(), q);
          k.axpy(lam / zt, jb_next_.data(), gb_.data(), q);
        }
      } else {
        terms.loglik += std::log(floor);
      }
      ++e;
    }

    z = z_next;
    if (grads) {
      std::swap(jt_, jt_next_);
      std::swap(jb_, jb_next_);
    }
  }
  if (path) path->back() = z;
  if (record) {
    record->z.values.back() = z;
    std::copy(jt_.begin(), jt_.end(), record->j_theta.end() - static_cast<std::ptrdiff_t>(p));
    std::copy(jb_.begin(), jb_.end(), record->j_beta.end() - static_cast<std::ptrdiff_t>(q));
  }
  if (grads) {
    if (!nn::all_finite(gt_) || !nn::all_finite(gb_)) {
      fail(ErrorCode::NonFiniteGradient, "pathwise gradient is not finite");
    }
    if (!g_theta.empty()) k.axpy(weight, gt_.data(), g_theta.data(), p);
    if (!g_beta.empty()) k.axpy(weight, gb_.data(), g_beta.data(), q);
  }
  return terms;
}

AugmentedTrajectory simulate_augmented(const VariationalModel& model, const EventSequence& events, double horizon,
                                       const BrownianPath& noise) {
  PathwiseSimulator sim(model, events, horizon, noise.grid);
  AugmentedTrajectory out;
  sim.run(noise.increments, {}, {}, 1.0, nullptr, &out);
  return out;
}

Trajectory simulate_model_posterior(const VariationalModel& model, const EventSequence& events, double horizon,
                                    const BrownianPath& noise) {
  PathwiseSimulator sim(model, events, horizon, noise.grid);
  Trajectory out{noise.grid, {}};
  sim.run(noise.increments, {}, {}, 1.0, &out.values);
  return out;
}

}  // namespace coxsde
