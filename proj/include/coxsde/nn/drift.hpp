#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "coxsde/nn/mlp.hpp"
#include "coxsde/sde.hpp"

namespace coxsde::nn {

/// Trainable prior drift b_theta(z, t). Either a network evaluated as
/// output_scale * net(z * state_scale, t), or an affine map a + b z + c t
/// whose parameters are (a, b, c).
class PriorDrift {
 public:
  enum class Kind { Neural, Affine };

  PriorDrift() = default;
  static PriorDrift neural(Mlp net, double state_scale = 1.0, double output_scale = 1.0);
  static PriorDrift affine(AffineDrift init);

  Kind kind() const noexcept { return kind_; }
  const Mlp& net() const noexcept { return net_; }
  double state_scale() const noexcept { return state_scale_; }
  double output_scale() const noexcept { return output_scale_; }

  std::size_t param_count() const noexcept;
  std::span<double> params() noexcept;
  std::span<const double> params() const noexcept;
  ParamLayout layout() const;

  using Workspace = Mlp::Workspace;
  Workspace make_workspace() const { return kind_ == Kind::Neural ? net_.make_workspace() : Workspace{}; }

  double value(double z, double t, Workspace& ws) const;

  /// Drift value; writes db/dz to `d_z` and db/dtheta to `d_params`
  /// (overwritten, size param_count()).
  double value_and_grads(double z, double t, double& d_z, std::span<double> d_params, Workspace& ws) const;

  /// Adds weight * db/dtheta at (z, t) to `grad`. Must follow a value()
  /// call at the same point on the same workspace.
  void accumulate_param_grad(double z, double t, double weight, std::span<double> grad, Workspace& ws) const;

  /// Snapshot of the current parameters as a simulation spec.
  SdeSpec to_sde(Diffusion diffusion, double z0) const;

  bool operator==(const PriorDrift& o) const {
    return kind_ == o.kind_ && net_ == o.net_ && affine_ == o.affine_ && state_scale_ == o.state_scale_ &&
           output_scale_ == o.output_scale_;
  }

 private:
  Kind kind_ = Kind::Affine;
  Mlp net_;
  std::vector<double> affine_ = {0.0, 0.0, 0.0};
  double state_scale_ = 1.0;
  double output_scale_ = 1.0;
};

}  // namespace coxsde::nn
