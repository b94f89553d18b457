#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coxsde/events.hpp"
#include "coxsde/nn/mlp.hpp"
#include "coxsde/sde.hpp"

namespace coxsde::nn {

/// Fixed input scalings of the encoder. psi sees (z * state, gap * time,
/// (T' - tau) * time); rho sees (t * time, T' * time, pooled * pool).
struct EncoderScales {
  double state = 1.0;
  double time = 1.0;
  double pool = 1.0;

  bool operator==(const EncoderScales&) const = default;
};

class DeepSetsEncoder;

/// Per-observation cache: event features and, for single-hidden-layer psi,
/// the event part of the first-layer pre-activations. Must be rebuilt after
/// the encoder parameters change.
class EncoderContext {
 public:
  EncoderContext(const DeepSetsEncoder& encoder, const EventSequence& events, double horizon, bool fused = true);

  double horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return taus_.size(); }
  bool fused() const noexcept { return fused_; }

  /// Index of the first event with tau > t.
  std::size_t first_after(double t) const noexcept;

 private:
  friend class DeepSetsEncoder;
  double horizon_;
  bool fused_;
  std::vector<double> taus_;
  std::vector<double> gap_;   // scaled
  std::vector<double> rem_;   // scaled
  std::vector<double> pre_;   // K x hidden
  std::vector<double> slope_; // hidden
};

struct EncoderWorkspace {
  std::vector<double> s0, s1, s_gap, s_rem, delta;
  std::vector<double> pooled, g, psi_in, rho_in, rho_in_bar;
  Mlp::Workspace psi, rho;
};

struct EncoderValue {
  double u = 0.0;
  double du_dz = 0.0;
  double rho = 0.0;
};

/// u(z, t) = sigma(z) * rho(t, T', sum_{t < tau_i <= T'} psi(z, gap_i, T' - tau_i)).
class DeepSetsEncoder {
 public:
  DeepSetsEncoder() = default;
  DeepSetsEncoder(Mlp psi, Mlp rho, EncoderScales scales = {});

  /// Xavier initialisation; the rho output layer is scaled by `rho_gain`.
  static DeepSetsEncoder xavier(std::vector<std::size_t> psi_sizes, std::vector<std::size_t> rho_sizes,
                                std::uint64_t seed, EncoderScales scales = {}, double rho_gain = 1.0);

  const Mlp& psi() const noexcept { return psi_; }
  const Mlp& rho() const noexcept { return rho_; }
  const EncoderScales& scales() const noexcept { return scales_; }
  std::size_t feature_width() const noexcept { return psi_.output_size(); }

  std::size_t param_count() const noexcept { return psi_.param_count() + rho_.param_count(); }
  /// Concatenated (psi, rho) parameters.
  std::vector<double> params() const;
  void set_params(std::span<const double> values);
  ParamLayout layout() const;

  bool supports_fused() const noexcept { return psi_.num_layers() == 2; }

  EncoderWorkspace make_workspace() const;

  /// Value of u. When `du_dbeta` is non-empty the derivatives du/dz and
  /// du/dbeta (overwritten) are computed as well.
  EncoderValue evaluate(const EncoderContext& ctx, double z, double t, const Diffusion& diffusion,
                        std::span<double> du_dbeta, EncoderWorkspace& ws) const;

  /// Zeroes the rho output layer, making u identically 0.
  void zero_output();

  bool operator==(const DeepSetsEncoder& o) const {
    return psi_ == o.psi_ && rho_ == o.rho_ && scales_ == o.scales_;
  }

 private:
  friend class EncoderContext;
  void pool_fused(const EncoderContext& ctx, std::size_t first, double x0, bool derivs, EncoderWorkspace& ws) const;
  void pool_generic(const EncoderContext& ctx, std::size_t first, double x0, EncoderWorkspace& ws) const;

  Mlp psi_;
  Mlp rho_;
  EncoderScales scales_;
};

struct EncoderGrads {
  double u = 0.0;
  double du_dz = 0.0;
  std::vector<double> du_dbeta;
};

/// One-shot evaluation with all derivatives.
EncoderGrads encoder_eval(const DeepSetsEncoder& encoder, double z, double t, double horizon,
                          const EventSequence& events, const Diffusion& diffusion, bool fused = true);

}  // namespace coxsde::nn
