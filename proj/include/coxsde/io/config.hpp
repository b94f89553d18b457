#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coxsde/baselines.hpp"
#include "coxsde/model.hpp"
#include "coxsde/train.hpp"

namespace coxsde::io {

/// Flat TOML subset: `[section]` headers, `key = value` pairs with
/// booleans, integers, floats, basic strings and one-line numeric arrays,
/// and `#` comments. Keys are addressed as "section.key".
class Config {
 public:
  using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

  static Config parse(std::string_view text, const std::string& origin = "<config>");

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

  bool get_bool(const std::string& key, bool fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_array(const std::string& key, const std::vector<double>& fallback) const;

  /// Throws ConfigError naming the first key never read.
  void reject_unused() const;

  const std::map<std::string, Value>& values() const { return values_; }

 private:
  const Value* find(const std::string& key) const;
  std::map<std::string, Value> values_;
  mutable std::set<std::string> used_;
};

/// Every tunable of the command-line drivers, with defaults matching the
/// synthetic experiment.
struct ExperimentConfig {
  // [data]
  double horizon = 4.0;
  std::size_t steps = 100;
  std::string drift = "cir";
  double kappa = 0.3;
  double mean = 80.0;
  double sigma = 1.0;
  double z0 = 5.0;
  std::size_t n = 256;
  std::uint64_t seed = 0;
  double time_rescale = kDefaultRescale;
  double thinning = 0.001;
  // [model]
  ModelConfig model;
  // [train]
  TrainConfig train;
  // [mcmc]
  MhConfig mcmc;
  // [em]
  EmConfig em;

  static constexpr double kDefaultRescale = 4.0 / 1440.0;
};

/// Reads known keys, applies defaults and rejects unknown keys.
ExperimentConfig load_experiment_config(const Config& cfg);

/// Fully resolved configuration as TOML text.
std::string to_toml(const ExperimentConfig& cfg);

}  // namespace coxsde::io
