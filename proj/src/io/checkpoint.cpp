#include "coxsde/io/checkpoint.hpp"

#include <string>

#include "coxsde/errors.hpp"

namespace coxsde::io {
namespace {

nlohmann::json diffusion_json(const Diffusion& d) {
  return {{"kind", d.kind == Diffusion::Kind::SqrtState ? "sqrt" : "constant"}, {"scale", d.scale}};
}

Diffusion diffusion_from(const nlohmann::json& j) {
  const std::string kind = j.at("kind");
  const double scale = j.at("scale");
  if (kind == "sqrt") return Diffusion::sqrt_state(scale);
  if (kind == "constant") return Diffusion::constant(scale);
  fail(ErrorCode::IoError, "unknown diffusion kind '" + kind + "'");
}

nlohmann::json adam_json(const nn::AdamState& s) {
  return {{"lr", s.config.lr},     {"beta1", s.config.beta1}, {"beta2", s.config.beta2}, {"eps", s.config.eps},
          {"clip_norm", s.config.clip_norm}, {"step", s.step}, {"m", s.m}, {"v", s.v}};
}

nn::AdamState adam_from(const nlohmann::json& j) {
  nn::AdamState s;
  s.config = {j.at("lr"), j.at("beta1"), j.at("beta2"), j.at("eps"), j.at("clip_norm")};
  s.step = j.at("step");
  s.m = j.at("m").get<std::vector<double>>();
  s.v = j.at("v").get<std::vector<double>>();
  return s;
}

}  // namespace

nlohmann::json to_json(const nn::Mlp& net) {
  return {{"layer_sizes", net.layer_sizes()},
          {"params", std::vector<double>(net.params().begin(), net.params().end())}};
}

nn::Mlp mlp_from_json(const nlohmann::json& j) {
  nn::Mlp net(j.at("layer_sizes").get<std::vector<std::size_t>>());
  const auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != net.param_count()) fail(ErrorCode::ShapeMismatch, "checkpoint parameter count mismatch");
  std::copy(params.begin(), params.end(), net.params().begin());
  return net;
}

nlohmann::json to_json(const nn::PriorDrift& d) {
  if (d.kind() == nn::PriorDrift::Kind::Affine) {
    return {{"kind", "affine"}, {"params", std::vector<double>(d.params().begin(), d.params().end())}};
  }
  return {{"kind", "neural"}, {"net", to_json(d.net())}, {"state_scale", d.state_scale()}, {"output_scale", d.output_scale()}};
}

nn::PriorDrift drift_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind");
  if (kind == "affine") {
    const auto p = j.at("params").get<std::vector<double>>();
    if (p.size() != 3) fail(ErrorCode::ShapeMismatch, "affine drift needs three parameters");
    return nn::PriorDrift::affine({p[0], p[1], p[2]});
  }
  if (kind != "neural") fail(ErrorCode::IoError, "unknown drift kind '" + kind + "'");
  return nn::PriorDrift::neural(mlp_from_json(j.at("net")), j.at("state_scale"), j.at("output_scale"));
}

nlohmann::json to_json(const VariationalModel& m) {
  const auto& s = m.encoder.scales();
  return {{"drift", to_json(m.drift)},
          {"encoder",
           {{"psi", to_json(m.encoder.psi())},
            {"rho", to_json(m.encoder.rho())},
            {"scales", {{"state", s.state}, {"time", s.time}, {"pool", s.pool}}}}},
          {"diffusion", diffusion_json(m.diffusion)},
          {"z0", m.z0}};
}

VariationalModel model_from_json(const nlohmann::json& j) {
  VariationalModel m;
  m.drift = drift_from_json(j.at("drift"));
  const auto& e = j.at("encoder");
  const auto& s = e.at("scales");
  m.encoder = nn::DeepSetsEncoder(mlp_from_json(e.at("psi")), mlp_from_json(e.at("rho")),
                                  nn::EncoderScales{s.at("state"), s.at("time"), s.at("pool")});
  m.diffusion = diffusion_from(j.at("diffusion"));
  m.z0 = j.at("z0");
  return m;
}

nlohmann::json checkpoint_to_json(const TrainState& st, std::uint64_t seed) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& r : st.history) {
    hist.push_back({{"epoch", r.epoch},
                    {"elbo_mean", r.elbo_mean},
                    {"elbo_se", r.elbo_se},
                    {"grad_norm_theta", r.grad_norm_theta},
                    {"grad_norm_beta", r.grad_norm_beta},
                    {"skipped_batches", r.skipped_batches}});
  }
  return {{"format_version", kCheckpointVersion},
          {"seed", seed},
          {"model", to_json(st.model)},
          {"adam_theta", adam_json(st.adam_theta)},
          {"adam_beta", adam_json(st.adam_beta)},
          {"epochs_done", st.epochs_done},
          {"updates", st.updates},
          {"history", hist}};
}

TrainState checkpoint_from_json(const nlohmann::json& j, std::uint64_t* seed) {
  try {
    const int version = j.at("format_version");
    if (version != kCheckpointVersion) fail(ErrorCode::IoError, "unsupported checkpoint version " + std::to_string(version));
    TrainState st;
    st.model = model_from_json(j.at("model"));
    st.adam_theta = adam_from(j.at("adam_theta"));
    st.adam_beta = adam_from(j.at("adam_beta"));
    st.epochs_done = j.at("epochs_done");
    st.updates = j.at("updates");
    for (const auto& r : j.at("history")) {
      st.history.push_back({r.at("epoch"), r.at("elbo_mean"), r.at("elbo_se"), r.at("grad_norm_theta"),
                            r.at("grad_norm_beta"), r.at("skipped_batches")});
    }
    if (seed) *seed = j.at("seed");
    return st;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoError, std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace coxsde::io
