#pragma once

#include <cstdint>

#include "coxsde/model.hpp"
#include "coxsde/nn/drift.hpp"
#include "coxsde/train.hpp"
#include "json.hpp"

namespace coxsde::io {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json to_json(const nn::Mlp& net);
nn::Mlp mlp_from_json(const nlohmann::json& j);

nlohmann::json to_json(const nn::PriorDrift& drift);
nn::PriorDrift drift_from_json(const nlohmann::json& j);

nlohmann::json to_json(const VariationalModel& model);
VariationalModel model_from_json(const nlohmann::json& j);

/// Model, optimizer state, progress and history. Doubles are written with
/// round-trip precision, so loading reproduces the state bit for bit.
nlohmann::json checkpoint_to_json(const TrainState& state, std::uint64_t seed);
TrainState checkpoint_from_json(const nlohmann::json& j, std::uint64_t* seed = nullptr);

}  // namespace coxsde::io
