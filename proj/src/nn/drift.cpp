#include "coxsde/nn/drift.hpp"

#include <algorithm>
#include <memory>

#include "coxsde/errors.hpp"

namespace coxsde::nn {

PriorDrift PriorDrift::neural(Mlp net, double state_scale, double output_scale) {
  if (net.input_size() != 2 || net.output_size() != 1) {
    fail(ErrorCode::ShapeMismatch, "drift network must map (z, t) to a scalar");
  }
  PriorDrift d;
  d.kind_ = Kind::Neural;
  d.net_ = std::move(net);
  d.state_scale_ = state_scale;
  d.output_scale_ = output_scale;
  return d;
}

PriorDrift PriorDrift::affine(AffineDrift init) {
  PriorDrift d;
  d.kind_ = Kind::Affine;
  d.affine_ = {init.a, init.b, init.c};
  return d;
}

std::size_t PriorDrift::param_count() const noexcept {
  return kind_ == Kind::Neural ? net_.param_count() : affine_.size();
}

std::span<double> PriorDrift::params() noexcept {
  return kind_ == Kind::Neural ? net_.params() : std::span<double>(affine_);
}

std::span<const double> PriorDrift::params() const noexcept {
  return kind_ == Kind::Neural ? net_.params() : std::span<const double>(affine_);
}

ParamLayout PriorDrift::layout() const {
  if (kind_ == Kind::Neural) return net_.layout();
  ParamLayout l;
  l.add("affine", 3, 1);
  return l;
}

double PriorDrift::value(double z, double t, Workspace& ws) const {
  if (kind_ == Kind::Affine) return affine_[0] + affine_[1] * z + affine_[2] * t;
  const double x[2] = {z * state_scale_, t};
  return output_scale_ * net_.forward(x, ws)[0];
}

double PriorDrift::value_and_grads(double z, double t, double& d_z, std::span<double> d_params, Workspace& ws) const {
  if (kind_ == Kind::Affine) {
    d_z = affine_[1];
    d_params[0] = 1.0;
    d_params[1] = z;
    d_params[2] = t;
    return affine_[0] + affine_[1] * z + affine_[2] * t;
  }
  const double x[2] = {z * state_scale_, t};
  const double v = output_scale_ * net_.forward(x, ws)[0];
  std::fill(d_params.begin(), d_params.end(), 0.0);
  double x_bar[2];
  net_.backward(std::span(&output_scale_, 1), ws, d_params, x_bar);
  d_z = x_bar[0] * state_scale_;
  return v;
}

void PriorDrift::accumulate_param_grad(double z, double t, double weight, std::span<double> grad,
                                       Workspace& ws) const {
  if (kind_ == Kind::Affine) {
    grad[0] += weight;
    grad[1] += weight * z;
    grad[2] += weight * t;
    return;
  }
  const double y_bar = weight * output_scale_;
  net_.backward(std::span(&y_bar, 1), ws, grad, {});
}

SdeSpec PriorDrift::to_sde(Diffusion diffusion, double z0) const {
  if (kind_ == Kind::Affine) return SdeSpec::from_affine({affine_[0], affine_[1], affine_[2]}, diffusion, z0);
  SdeSpec spec;
  auto snapshot = std::make_shared<const PriorDrift>(*this);
  spec.drift = [snapshot](double z, double t) {
    thread_local Workspace ws;
    return snapshot->value(z, t, ws);
  };
  spec.diffusion = diffusion;
  spec.z0 = z0;
  return spec;
}

}  // namespace coxsde::nn
