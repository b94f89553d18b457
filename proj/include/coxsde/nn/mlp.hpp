#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coxsde/nn/params.hpp"

namespace coxsde::nn {

/// Dense network: tanh on hidden layers, identity on the output layer.
/// Parameters are stored flat, per layer the weight matrix (out x in,
/// row-major) followed by the bias.
class Mlp {
 public:
  Mlp() = default;

  /// All parameters zero.
  explicit Mlp(std::vector<std::size_t> layer_sizes);

  /// Xavier-uniform weights, zero biases; the output layer weights are
  /// multiplied by `output_gain`.
  static Mlp xavier(std::vector<std::size_t> layer_sizes, std::uint64_t seed, double output_gain = 1.0);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t num_layers() const noexcept { return sizes_.empty() ? 0 : sizes_.size() - 1; }
  std::size_t input_size() const noexcept { return sizes_.front(); }
  std::size_t output_size() const noexcept { return sizes_.back(); }
  std::size_t param_count() const noexcept { return params_.size(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  std::span<double> weights(std::size_t layer) noexcept;
  std::span<const double> weights(std::size_t layer) const noexcept;
  std::span<double> bias(std::size_t layer) noexcept;
  std::span<const double> bias(std::size_t layer) const noexcept;
  std::size_t weight_offset(std::size_t layer) const noexcept { return offsets_[layer]; }
  std::size_t bias_offset(std::size_t layer) const noexcept { return offsets_[layer] + sizes_[layer] * sizes_[layer + 1]; }

  ParamLayout layout() const;

  struct Workspace {
    std::vector<std::vector<double>> acts;  // acts[0] = input, acts[l + 1] = layer l output
    std::vector<double> delta;
    std::vector<double> next;
  };
  Workspace make_workspace() const;
  bool fits(const Workspace& ws) const noexcept;

  /// Output view into the workspace. Throws ShapeMismatch on wrong input size.
  std::span<const double> forward(std::span<const double> x, Workspace& ws) const;

  /// Reverse pass for output cotangent `y_bar`, using activations from the
  /// preceding forward() on the same workspace. Accumulates into
  /// `param_bar` and overwrites `x_bar`; either may be empty.
  void backward(std::span<const double> y_bar, Workspace& ws, std::span<double> param_bar, std::span<double> x_bar) const;

  bool operator==(const Mlp& o) const { return sizes_ == o.sizes_ && params_ == o.params_; }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct MlpGradients {
  double value = 0.0;
  std::vector<double> d_input;
  std::vector<double> d_params;
};

/// Value of a scalar-output network and its exact derivatives.
MlpGradients mlp_eval_with_grads(const Mlp& net, std::span<const double> input);

ParamVector flatten(const Mlp& net);
void unflatten(const ParamVector& flat, Mlp& net);

}  // namespace coxsde::nn
