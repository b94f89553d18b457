#include "coxsde/nn/deepsets.hpp"

#include <algorithm>

#include "coxsde/errors.hpp"
#include "coxsde/simd/kernels.hpp"

namespace coxsde::nn {

EncoderContext::EncoderContext(const DeepSetsEncoder& encoder, const EventSequence& events, double horizon,
                               bool fused)
    : horizon_(horizon), fused_(fused && encoder.supports_fused()) {
  const auto times = events.times();
  const double ts = encoder.scales().time;
  double prev = 0.0;
  for (double tau : times) {
    if (tau > horizon) break;
    taus_.push_back(tau);
    gap_.push_back((tau - prev) * ts);
    rem_.push_back((horizon - tau) * ts);
    prev = tau;
  }
  if (!fused_) return;
  const Mlp& psi = encoder.psi();
  const std::size_t hidden = psi.layer_sizes()[1];
  const auto w1 = psi.weights(0);
  const auto b1 = psi.bias(0);
  slope_.resize(hidden);
  for (std::size_t h = 0; h < hidden; ++h) slope_[h] = w1[h * 3];
  pre_.resize(taus_.size() * hidden);
  for (std::size_t k = 0; k < taus_.size(); ++k) {
    double* row = pre_.data() + k * hidden;
    for (std::size_t h = 0; h < hidden; ++h) row[h] = w1[h * 3 + 1] * gap_[k] + w1[h * 3 + 2] * rem_[k] + b1[h];
  }
}

std::size_t EncoderContext::first_after(double t) const noexcept {
  return static_cast<std::size_t>(std::upper_bound(taus_.begin(), taus_.end(), t) - taus_.begin());
}

DeepSetsEncoder::DeepSetsEncoder(Mlp psi, Mlp rho, EncoderScales scales)
    : psi_(std::move(psi)), rho_(std::move(rho)), scales_(scales) {
  if (psi_.input_size() != 3) fail(ErrorCode::ShapeMismatch, "psi must take (z, gap, remaining time)");
  if (rho_.input_size() != 2 + psi_.output_size() || rho_.output_size() != 1) {
    fail(ErrorCode::ShapeMismatch, "rho must map (t, horizon, pooled features) to a scalar");
  }
}

DeepSetsEncoder DeepSetsEncoder::xavier(std::vector<std::size_t> psi_sizes, std::vector<std::size_t> rho_sizes,
                                        std::uint64_t seed, EncoderScales scales, double rho_gain) {
  return DeepSetsEncoder(Mlp::xavier(std::move(psi_sizes), seed ^ 0x5053ULL),
                         Mlp::xavier(std::move(rho_sizes), seed ^ 0x52484fULL, rho_gain), scales);
}

std::vector<double> DeepSetsEncoder::params() const {
  std::vector<double> out(psi_.params().begin(), psi_.params().end());
  out.insert(out.end(), rho_.params().begin(), rho_.params().end());
  return out;
}

void DeepSetsEncoder::set_params(std::span<const double> values) {
  if (values.size() != param_count()) fail(ErrorCode::ShapeMismatch, "encoder parameter count mismatch");
  std::copy(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(psi_.param_count()), psi_.params().begin());
  std::copy(values.begin() + static_cast<std::ptrdiff_t>(psi_.param_count()), values.end(), rho_.params().begin());
}

ParamLayout DeepSetsEncoder::layout() const {
  ParamLayout l;
  l.append(psi_.layout(), "psi.");
  l.append(rho_.layout(), "rho.");
  return l;
}

EncoderWorkspace DeepSetsEncoder::make_workspace() const {
  EncoderWorkspace ws;
  const std::size_t hidden = psi_.layer_sizes()[1];
  const std::size_t r = feature_width();
  ws.s0.assign(hidden, 0.0);
  ws.s1.assign(hidden, 0.0);
  ws.s_gap.assign(hidden, 0.0);
  ws.s_rem.assign(hidden, 0.0);
  ws.delta.assign(hidden, 0.0);
  ws.pooled.assign(r, 0.0);
  ws.g.assign(r, 0.0);
  ws.psi_in.assign(3, 0.0);
  ws.rho_in.assign(2 + r, 0.0);
  ws.rho_in_bar.assign(2 + r, 0.0);
  ws.psi = psi_.make_workspace();
  ws.rho = rho_.make_workspace();
  return ws;
}

void DeepSetsEncoder::zero_output() {
  const std::size_t last = rho_.num_layers() - 1;
  std::fill(rho_.weights(last).begin(), rho_.weights(last).end(), 0.0);
  std::fill(rho_.bias(last).begin(), rho_.bias(last).end(), 0.0);
}

void DeepSetsEncoder::pool_fused(const EncoderContext& ctx, std::size_t first, double x0, bool derivs,
                                 EncoderWorkspace& ws) const {
  const auto& k = simd::kernels();
  const std::size_t hidden = psi_.layer_sizes()[1];
  const std::size_t rows = ctx.taus_.size() - first;
  simd::PoolTanhArgs a;
  a.pre = ctx.pre_.data() + first * hidden;
  a.slope = ctx.slope_.data();
  a.x = x0;
  a.rows = rows;
  a.width = hidden;
  a.f0 = ctx.gap_.data() + first;
  a.f1 = ctx.rem_.data() + first;
  a.sum = ws.s0.data();
  if (derivs) {
    a.d_sum = ws.s1.data();
    a.d_f0 = ws.s_gap.data();
    a.d_f1 = ws.s_rem.data();
  }
  k.pool_tanh(a);
  const std::size_t r = feature_width();
  k.gemv(psi_.weights(1).data(), ws.s0.data(), nullptr, ws.pooled.data(), r, hidden);
  k.axpy(static_cast<double>(rows), psi_.bias(1).data(), ws.pooled.data(), r);
}

void DeepSetsEncoder::pool_generic(const EncoderContext& ctx, std::size_t first, double x0,
                                   EncoderWorkspace& ws) const {
  std::fill(ws.pooled.begin(), ws.pooled.end(), 0.0);
  for (std::size_t i = first; i < ctx.taus_.size(); ++i) {
    ws.psi_in = {x0, ctx.gap_[i], ctx.rem_[i]};
    const auto out = psi_.forward(ws.psi_in, ws.psi);
    for (std::size_t c = 0; c < out.size(); ++c) ws.pooled[c] += out[c];
  }
}

EncoderValue DeepSetsEncoder::evaluate(const EncoderContext& ctx, double z, double t, const Diffusion& diffusion,
                                       std::span<double> du_dbeta, EncoderWorkspace& ws) const {
  const bool derivs = !du_dbeta.empty();
  const std::size_t first = ctx.first_after(t);
  const double x0 = z * scales_.state;
  const std::size_t r = feature_width();

  if (ctx.fused_) {
    pool_fused(ctx, first, x0, derivs, ws);
  } else {
    pool_generic(ctx, first, x0, ws);
  }

  ws.rho_in[0] = t * scales_.time;
  ws.rho_in[1] = ctx.horizon_ * scales_.time;
  for (std::size_t c = 0; c < r; ++c) ws.rho_in[2 + c] = ws.pooled[c] * scales_.pool;
  EncoderValue out;
  out.rho = rho_.forward(ws.rho_in, ws.rho)[0];
  const double sigma = diffusion.value(z);
  out.u = sigma * out.rho;
  if (!derivs) return out;

  const auto& k = simd::kernels();
  std::fill(du_dbeta.begin(), du_dbeta.end(), 0.0);
  const auto psi_bar = du_dbeta.first(psi_.param_count());
  const auto rho_bar = du_dbeta.subspan(psi_.param_count());
  rho_.backward(std::span(&sigma, 1), ws.rho, rho_bar, ws.rho_in_bar);
  for (std::size_t c = 0; c < r; ++c) ws.g[c] = ws.rho_in_bar[2 + c] * scales_.pool;

  double pooled_dz = 0.0;
  if (ctx.fused_) {
    const std::size_t hidden = psi_.layer_sizes()[1];
    const std::size_t rows = ctx.taus_.size() - first;
    std::fill(ws.delta.begin(), ws.delta.end(), 0.0);
    k.gemv_t(psi_.weights(1).data(), ws.g.data(), ws.delta.data(), r, hidden);
    double* gw1 = psi_bar.data() + psi_.weight_offset(0);
    double* gb1 = psi_bar.data() + psi_.bias_offset(0);
    for (std::size_t h = 0; h < hidden; ++h) {
      const double d = ws.delta[h];
      const double ds1 = d * ws.s1[h];
      pooled_dz += ds1 * ctx.slope_[h];
      gw1[h * 3] = ds1 * x0;
      gw1[h * 3 + 1] = d * ws.s_gap[h];
      gw1[h * 3 + 2] = d * ws.s_rem[h];
      gb1[h] = ds1;
    }
    k.rank1(psi_bar.data() + psi_.weight_offset(1), ws.g.data(), ws.s0.data(), r, hidden);
    k.axpy(static_cast<double>(rows), ws.g.data(), psi_bar.data() + psi_.bias_offset(1), r);
  } else {
    double x_bar[3];
    for (std::size_t i = first; i < ctx.taus_.size(); ++i) {
      ws.psi_in = {x0, ctx.gap_[i], ctx.rem_[i]};
      psi_.forward(ws.psi_in, ws.psi);
      psi_.backward(ws.g, ws.psi, psi_bar, x_bar);
      pooled_dz += x_bar[0];
    }
  }
  out.du_dz = diffusion.dz(z) * out.rho + pooled_dz * scales_.state;
  return out;
}

EncoderGrads encoder_eval(const DeepSetsEncoder& encoder, double z, double t, double horizon,
                          const EventSequence& events, const Diffusion& diffusion, bool fused) {
  const EncoderContext ctx(encoder, events, horizon, fused);
  auto ws = encoder.make_workspace();
  EncoderGrads g;
  g.du_dbeta.assign(encoder.param_count(), 0.0);
  const auto v = encoder.evaluate(ctx, z, t, diffusion, g.du_dbeta, ws);
  g.u = v.u;
  g.du_dz = v.du_dz;
  return g;
}

}  // namespace coxsde::nn
