#include "coxsde/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coxsde/errors.hpp"
#include "coxsde/random.hpp"
#include "coxsde/simd/kernels.hpp"

namespace coxsde::nn {

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) fail(ErrorCode::ShapeMismatch, "an MLP needs at least an input and an output layer");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] == 0 || sizes_[l + 1] == 0) fail(ErrorCode::ShapeMismatch, "MLP layer of width zero");
    offsets_.push_back(total);
    total += sizes_[l] * sizes_[l + 1] + sizes_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::xavier(std::vector<std::size_t> layer_sizes, std::uint64_t seed, double output_gain) {
  Mlp net(std::move(layer_sizes));
  Rng rng = make_rng(seed);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const double fan_in = static_cast<double>(net.sizes_[l]);
    const double fan_out = static_cast<double>(net.sizes_[l + 1]);
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    if (l + 1 == net.num_layers()) bound *= output_gain;
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (double& w : net.weights(l)) w = uniform(rng);
  }
  return net;
}

std::span<double> Mlp::weights(std::size_t layer) noexcept {
  return std::span(params_).subspan(offsets_[layer], sizes_[layer] * sizes_[layer + 1]);
}
std::span<const double> Mlp::weights(std::size_t layer) const noexcept {
  return std::span(params_).subspan(offsets_[layer], sizes_[layer] * sizes_[layer + 1]);
}
std::span<double> Mlp::bias(std::size_t layer) noexcept {
  return std::span(params_).subspan(bias_offset(layer), sizes_[layer + 1]);
}
std::span<const double> Mlp::bias(std::size_t layer) const noexcept {
  return std::span(params_).subspan(bias_offset(layer), sizes_[layer + 1]);
}

ParamLayout Mlp::layout() const {
  ParamLayout layout;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    layout.add("W" + std::to_string(l), sizes_[l + 1], sizes_[l]);
    layout.add("b" + std::to_string(l), sizes_[l + 1], 1);
  }
  return layout;
}

Mlp::Workspace Mlp::make_workspace() const {
  Workspace ws;
  ws.acts.reserve(sizes_.size());
  for (std::size_t s : sizes_) ws.acts.emplace_back(s, 0.0);
  const std::size_t widest = *std::max_element(sizes_.begin(), sizes_.end());
  ws.delta.assign(widest, 0.0);
  ws.next.assign(widest, 0.0);
  return ws;
}

bool Mlp::fits(const Workspace& ws) const noexcept {
  if (ws.acts.size() != sizes_.size()) return false;
  for (std::size_t l = 0; l < sizes_.size(); ++l) {
    if (ws.acts[l].size() != sizes_[l]) return false;
  }
  return true;
}

std::span<const double> Mlp::forward(std::span<const double> x, Workspace& ws) const {
  if (x.size() != input_size()) {
    fail(ErrorCode::ShapeMismatch,
         "MLP input has " + std::to_string(x.size()) + " entries, expected " + std::to_string(input_size()));
  }
  if (!fits(ws)) ws = make_workspace();
  const auto& k = simd::kernels();
  std::copy(x.begin(), x.end(), ws.acts[0].begin());
  const std::size_t layers = num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    double* out = ws.acts[l + 1].data();
    k.gemv(params_.data() + offsets_[l], ws.acts[l].data(), params_.data() + bias_offset(l), out, sizes_[l + 1],
           sizes_[l]);
    if (l + 1 < layers) k.tanh(out, out, sizes_[l + 1]);
  }
  return ws.acts.back();
}

void Mlp::backward(std::span<const double> y_bar, Workspace& ws, std::span<double> param_bar,
                   std::span<double> x_bar) const {
  const auto& k = simd::kernels();
  const std::size_t layers = num_layers();
  std::copy(y_bar.begin(), y_bar.end(), ws.delta.begin());
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes_[l];
    const std::size_t out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    if (!param_bar.empty()) {
      k.rank1(param_bar.data() + offsets_[l], ws.delta.data(), ws.acts[l].data(), out, in);
      k.axpy(1.0, ws.delta.data(), param_bar.data() + bias_offset(l), out);
    }
    if (l == 0 && x_bar.empty()) break;
    std::fill(ws.next.begin(), ws.next.begin() + static_cast<std::ptrdiff_t>(in), 0.0);
    k.gemv_t(w, ws.delta.data(), ws.next.data(), out, in);
    if (l > 0) {
      const double* h = ws.acts[l].data();
      for (std::size_t i = 0; i < in; ++i) ws.next[i] *= 1.0 - h[i] * h[i];
    }
    std::swap(ws.delta, ws.next);
  }
  if (!x_bar.empty()) std::copy(ws.delta.begin(), ws.delta.begin() + static_cast<std::ptrdiff_t>(input_size()), x_bar.begin());
}

MlpGradients mlp_eval_with_grads(const Mlp& net, std::span<const double> input) {
  if (net.output_size() != 1) fail(ErrorCode::ShapeMismatch, "mlp_eval_with_grads needs a scalar output");
  auto ws = net.make_workspace();
  MlpGradients g;
  g.value = net.forward(input, ws)[0];
  g.d_input.assign(net.input_size(), 0.0);
  g.d_params.assign(net.param_count(), 0.0);
  const double one = 1.0;
  net.backward(std::span(&one, 1), ws, g.d_params, g.d_input);
  return g;
}

ParamVector flatten(const Mlp& net) {
  return ParamVector{net.layout(), std::vector<double>(net.params().begin(), net.params().end())};
}

void unflatten(const ParamVector& flat, Mlp& net) {
  if (!(flat.layout == net.layout()) || flat.values.size() != net.param_count()) {
    fail(ErrorCode::ShapeMismatch, "parameter vector layout does not match the network");
  }
  std::copy(flat.values.begin(), flat.values.end(), net.params().begin());
}

}  // namespace coxsde::nn
