#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "coxsde/events.hpp"
#include "coxsde/nn/deepsets.hpp"
#include "coxsde/nn/drift.hpp"
#include "coxsde/sde.hpp"

namespace coxsde {

/// Prior drift b_theta, posterior correction u_beta and the fixed diffusion.
struct VariationalModel {
  nn::PriorDrift drift;
  nn::DeepSetsEncoder encoder;
  Diffusion diffusion = Diffusion::sqrt_state(1.0);
  double z0 = 1.0;

  SdeSpec prior_spec() const { return drift.to_sde(diffusion, z0); }

  bool operator==(const VariationalModel&) const = default;
};

struct ModelConfig {
  std::vector<std::size_t> drift_sizes = {2, 64, 64, 1};
  std::vector<std::size_t> psi_sizes = {3, 64, 32};
  std::vector<std::size_t> rho_sizes = {34, 64, 1};
  double drift_output_gain = 0.1;
  double rho_output_gain = 0.1;
  Diffusion diffusion = Diffusion::sqrt_state(1.0);
  double z0 = 5.0;
};

/// Typical intensity and event count of a dataset, used to fix the input
/// and output scalings of the networks.
struct DataScale {
  double rate = 1.0;   // mean events per unit time, at least 1
  double count = 1.0;  // mean events per sequence, at least 1
};

DataScale data_scale(std::span<const EventSequence> data);

VariationalModel make_model(const ModelConfig& cfg, const DataScale& scale, std::uint64_t seed);

}  // namespace coxsde
