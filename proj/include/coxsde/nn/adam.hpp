#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace coxsde::nn {

struct AdamConfig {
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // <= 0 disables clipping

  bool operator==(const AdamConfig&) const = default;
};

struct AdamState {
  AdamConfig config;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::size_t n) : config(cfg), m(n, 0.0), v(n, 0.0) {}

  bool operator==(const AdamState&) const = default;
};

struct AdamStepInfo {
  double grad_norm = 0.0;     // before clipping
  double clip_scale = 1.0;
};

/// One descent step: the gradient is rescaled to L2 norm <= clip_norm, then
/// the bias-corrected Adam update is applied. Throws NonFiniteGradient.
AdamStepInfo adam_step(AdamState& state, std::span<double> params, std::span<const double> grad);

}  // namespace coxsde::nn
