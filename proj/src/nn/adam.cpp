#include "coxsde/nn/adam.hpp"

#include <cmath>
#include <string>

#include "coxsde/errors.hpp"
#include "coxsde/nn/params.hpp"

namespace coxsde::nn {

AdamStepInfo adam_step(AdamState& state, std::span<double> params, std::span<const double> grad) {
  if (grad.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    fail(ErrorCode::ShapeMismatch, "Adam state, parameters and gradient differ in size");
  }
  if (!all_finite(grad)) fail(ErrorCode::NonFiniteGradient, "non-finite gradient passed to the optimizer");
  const AdamConfig& c = state.config;
  AdamStepInfo info;
  info.grad_norm = l2_norm(grad);
  if (c.clip_norm > 0.0 && info.grad_norm > c.clip_norm) info.clip_scale = c.clip_norm / info.grad_norm;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i] * info.clip_scale;
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    params[i] -= c.lr * (state.m[i] / bc1) / (std::sqrt(state.v[i] / bc2) + c.eps);
  }
  return info;
}

}  // namespace coxsde::nn
