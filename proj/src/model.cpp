#include "coxsde/model.hpp"

#include <algorithm>

namespace coxsde {

DataScale data_scale(std::span<const EventSequence> data) {
  DataScale s;
  if (data.empty()) return s;
  double events = 0.0;
  double time = 0.0;
  for (const auto& seq : data) {
    events += static_cast<double>(seq.size());
    time += seq.horizon();
  }
  s.count = std::max(1.0, events / static_cast<double>(data.size()));
  s.rate = time > 0.0 ? std::max(1.0, events / time) : 1.0;
  return s;
}

VariationalModel make_model(const ModelConfig& cfg, const DataScale& scale, std::uint64_t seed) {
  VariationalModel m;
  m.drift = nn::PriorDrift::neural(nn::Mlp::xavier(cfg.drift_sizes, seed ^ 0x445249ULL, cfg.drift_output_gain),
                                   1.0 / scale.rate, scale.rate);
  nn::EncoderScales es;
  es.state = 1.0 / scale.rate;
  es.pool = 1.0 / scale.count;
  m.encoder = nn::DeepSetsEncoder::xavier(cfg.psi_sizes, cfg.rho_sizes, seed ^ 0x454e43ULL, es, cfg.rho_output_gain);
  m.diffusion = cfg.diffusion;
  m.z0 = cfg.z0;
  return m;
}

}  // namespace coxsde
