#include "coxsde/io/config.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "coxsde/errors.hpp"
#include "coxsde/io/files.hpp"

namespace coxsde::io {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::ConfigError, where + ": " + what);
}

bool parse_number(std::string_view s, Config::Value& out) {
  std::string clean;
  for (char c : s) {
    if (c != '_') clean += c;
  }
  if (clean.empty()) return false;
  const char* b = clean.data();
  const char* e = b + clean.size();
  if (clean.find_first_of(".eEna") == std::string::npos) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(b + (clean.front() == '+' ? 1 : 0), e, v);
    if (ec == std::errc() && p == e) {
      out = v;
      return true;
    }
  }
  double d = 0.0;
  const auto [p, ec] = std::from_chars(b + (clean.front() == '+' ? 1 : 0), e, d);
  if (ec == std::errc() && p == e) {
    out = d;
    return true;
  }
  return false;
}

std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

}  // namespace

Config Config::parse(std::string_view text, const std::string& origin) {
  Config cfg;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(where, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error(where, "expected 'key = value'");
    const std::string key = std::string(trim(line.substr(0, eq)));
    const std::string full = section.empty() ? key : section + "." + key;
    if (key.empty()) config_error(where, "empty key");
    if (cfg.values_.count(full)) config_error(where, "duplicate key '" + full + "'");
    const std::string_view raw = trim(line.substr(eq + 1));
    if (raw.empty()) config_error(where, "missing value for '" + full + "'");
    Value v;
    if (raw == "true" || raw == "false") {
      v = raw == "true";
    } else if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"') config_error(where, "unterminated string for '" + full + "'");
      v = std::string(raw.substr(1, raw.size() - 2));
    } else if (raw.front() == '[') {
      if (raw.back() != ']') config_error(where, "unterminated array for '" + full + "'");
      std::vector<double> arr;
      std::string_view body = raw.substr(1, raw.size() - 2);
      while (!trim(body).empty()) {
        const auto comma = body.find(',');
        const std::string_view item = trim(body.substr(0, comma));
        if (!item.empty()) {
          Value x;
          if (!parse_number(item, x)) config_error(where, "non-numeric array element in '" + full + "'");
          arr.push_back(std::holds_alternative<std::int64_t>(x) ? static_cast<double>(std::get<std::int64_t>(x))
                                                                 : std::get<double>(x));
        }
        if (comma == std::string_view::npos) break;
        body.remove_prefix(comma + 1);
      }
      v = std::move(arr);
    } else if (!parse_number(raw, v)) {
      config_error(where, "cannot parse value of '" + full + "'");
    }
    cfg.values_[full] = std::move(v);
  }
  return cfg;
}

const Config::Value* Config::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  used_.insert(key);
  return &it->second;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  fail(ErrorCode::ConfigError, "field '" + key + "' must be a boolean");
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  fail(ErrorCode::ConfigError, "field '" + key + "' must be an integer");
}

double Config::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* d = std::get_if<double>(v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
  fail(ErrorCode::ConfigError, "field '" + key + "' must be a number");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  fail(ErrorCode::ConfigError, "field '" + key + "' must be a string");
}

std::vector<double> Config::get_array(const std::string& key, const std::vector<double>& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (const auto* a = std::get_if<std::vector<double>>(v)) return *a;
  fail(ErrorCode::ConfigError, "field '" + key + "' must be an array of numbers");
}

void Config::reject_unused() const {
  for (const auto& [k, v] : values_) {
    if (!used_.count(k)) fail(ErrorCode::ConfigError, "unknown field '" + k + "'");
  }
}

namespace {

std::size_t count(const Config& c, const std::string& key, std::size_t fallback, bool allow_zero = false) {
  const std::int64_t v = c.get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0 || (!allow_zero && v == 0)) {
    fail(ErrorCode::ConfigError, "field '" + key + "' must be " + (allow_zero ? "non-negative" : "positive"));
  }
  return static_cast<std::size_t>(v);
}

double positive(const Config& c, const std::string& key, double fallback) {
  const double v = c.get_double(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::ConfigError, "field '" + key + "' must be positive");
  return v;
}

std::vector<std::size_t> sizes(const Config& c, const std::string& key, const std::vector<std::size_t>& fallback) {
  std::vector<double> fb(fallback.begin(), fallback.end());
  const auto arr = c.get_array(key, fb);
  std::vector<std::size_t> out;
  for (double x : arr) {
    if (!(x >= 1.0) || x != std::floor(x)) fail(ErrorCode::ConfigError, "field '" + key + "' must list positive integers");
    out.push_back(static_cast<std::size_t>(x));
  }
  if (out.size() < 2) fail(ErrorCode::ConfigError, "field '" + key + "' needs at least two layer sizes");
  return out;
}

Diffusion diffusion(const Config& c, const Diffusion& fallback) {
  const std::string kind = c.get_string("model.diffusion", fallback.kind == Diffusion::Kind::SqrtState ? "sqrt" : "constant");
  const double scale = c.get_double("model.diffusion_scale", fallback.scale);
  if (kind == "sqrt") return Diffusion::sqrt_state(scale);
  if (kind == "constant") return Diffusion::constant(scale);
  fail(ErrorCode::ConfigError, "field 'model.diffusion' must be \"sqrt\" or \"constant\"");
}

std::uint64_t seed(const Config& c, const std::string& key, std::uint64_t fallback) {
  const std::int64_t v = c.get_int(key, static_cast<std::int64_t>(fallback));
  if (v < 0) fail(ErrorCode::ConfigError, "field '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

ExperimentConfig load_experiment_config(const Config& c) {
  ExperimentConfig e;
  e.horizon = positive(c, "data.horizon", e.horizon);
  e.steps = count(c, "data.steps", e.steps);
  e.drift = c.get_string("data.drift", e.drift);
  if (e.drift != "cir") fail(ErrorCode::ConfigError, "field 'data.drift' must be \"cir\"");
  e.kappa = c.get_double("data.kappa", e.kappa);
  e.mean = c.get_double("data.mean", e.mean);
  e.sigma = c.get_double("data.sigma", e.sigma);
  e.z0 = c.get_double("data.z0", e.z0);
  if (e.z0 < 0.0) fail(ErrorCode::ConfigError, "field 'data.z0' must be non-negative");
  e.n = count(c, "data.n", e.n);
  e.seed = seed(c, "data.seed", e.seed);
  e.time_rescale = positive(c, "data.time_rescale", e.time_rescale);
  e.thinning = c.get_double("data.thinning", e.thinning);
  if (!(e.thinning >= 0.0 && e.thinning <= 1.0)) fail(ErrorCode::ConfigError, "field 'data.thinning' must lie in [0, 1]");

  e.model.drift_sizes = sizes(c, "model.drift_sizes", e.model.drift_sizes);
  e.model.psi_sizes = sizes(c, "model.psi_sizes", e.model.psi_sizes);
  e.model.rho_sizes = sizes(c, "model.rho_sizes", e.model.rho_sizes);
  e.model.drift_output_gain = c.get_double("model.drift_output_gain", e.model.drift_output_gain);
  e.model.rho_output_gain = c.get_double("model.rho_output_gain", e.model.rho_output_gain);
  e.model.diffusion = diffusion(c, e.model.diffusion);
  e.model.z0 = c.get_double("model.z0", e.z0);
  if (e.model.drift_sizes.front() != 2 || e.model.drift_sizes.back() != 1) {
    fail(ErrorCode::ConfigError, "field 'model.drift_sizes' must start with 2 and end with 1");
  }
  if (e.model.psi_sizes.front() != 3) fail(ErrorCode::ConfigError, "field 'model.psi_sizes' must start with 3");
  if (e.model.rho_sizes.front() != 2 + e.model.psi_sizes.back() || e.model.rho_sizes.back() != 1) {
    fail(ErrorCode::ConfigError, "field 'model.rho_sizes' must start with 2 + psi output width and end with 1");
  }

  auto& t = e.train;
  t.epochs = count(c, "train.epochs", t.epochs, true);
  t.batch_size = count(c, "train.batch_size", t.batch_size);
  t.mc_paths = count(c, "train.mc_paths", t.mc_paths);
  t.lr_theta = positive(c, "train.lr_theta", t.lr_theta);
  t.lr_beta = positive(c, "train.lr_beta", t.lr_beta);
  t.clip_norm = c.get_double("train.clip_norm", t.clip_norm);
  t.seed = seed(c, "train.seed", t.seed);
  t.random_horizon = c.get_bool("train.random_horizon", t.random_horizon);
  t.max_updates = count(c, "train.max_updates", t.max_updates, true);
  t.steps = e.steps;

  auto& m = e.mcmc;
  m.n_steps = count(c, "mcmc.n_steps", m.n_steps);
  m.burn_in = count(c, "mcmc.burn_in", m.burn_in, true);
  m.rho = c.get_double("mcmc.rho", m.rho);
  m.adapt = c.get_bool("mcmc.adapt", m.adapt);
  m.thin = count(c, "mcmc.thin", m.thin);
  m.seed = seed(c, "mcmc.seed", m.seed);
  if (!(m.rho > 0.0 && m.rho < 1.0)) fail(ErrorCode::ConfigError, "field 'mcmc.rho' must lie in (0, 1)");
  if (m.burn_in >= m.n_steps) fail(ErrorCode::ConfigError, "field 'mcmc.burn_in' must be below 'mcmc.n_steps'");

  auto& em = e.em;
  em.iterations = count(c, "em.iterations", em.iterations);
  em.initial_burn_in = count(c, "em.initial_burn_in", em.initial_burn_in, true);
  em.estep_steps = count(c, "em.estep_steps", em.estep_steps, true);
  em.samples_per_obs = count(c, "em.samples_per_obs", em.samples_per_obs);
  em.rho = c.get_double("em.rho", em.rho);
  em.mstep_steps = count(c, "em.mstep_steps", em.mstep_steps);
  em.mstep_batch = count(c, "em.mstep_batch", em.mstep_batch, true);
  em.lr = positive(c, "em.lr", em.lr);
  em.clip_norm = c.get_double("em.clip_norm", em.clip_norm);
  const std::string opt = c.get_string("em.optimizer", "adam");
  if (opt == "adam") {
    em.optimizer = EmConfig::Optimizer::Adam;
  } else if (opt == "sgd") {
    em.optimizer = EmConfig::Optimizer::Sgd;
  } else {
    fail(ErrorCode::ConfigError, "field 'em.optimizer' must be \"adam\" or \"sgd\"");
  }
  em.seed = seed(c, "em.seed", em.seed);
  em.steps = e.steps;
  c.reject_unused();
  return e;
}

namespace {

std::string array(const std::vector<std::size_t>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
  return s + "]";
}

std::string num(double x) {
  std::string s = format_double(x);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

std::string to_toml(const ExperimentConfig& e) {
  std::ostringstream os;
  os << "[data]\n"
     << "horizon = " << num(e.horizon) << "\nsteps = " << e.steps << "\ndrift = \"" << e.drift << "\"\n"
     << "kappa = " << num(e.kappa) << "\nmean = " << num(e.mean) << "\nsigma = " << num(e.sigma) << "\nz0 = " << num(e.z0)
     << "\nn = " << e.n << "\nseed = " << e.seed << "\ntime_rescale = " << num(e.time_rescale)
     << "\nthinning = " << num(e.thinning) << "\n\n";
  os << "[model]\n"
     << "drift_sizes = " << array(e.model.drift_sizes) << "\npsi_sizes = " << array(e.model.psi_sizes)
     << "\nrho_sizes = " << array(e.model.rho_sizes) << "\ndrift_output_gain = " << num(e.model.drift_output_gain)
     << "\nrho_output_gain = " << num(e.model.rho_output_gain) << "\ndiffusion = \""
     << (e.model.diffusion.kind == Diffusion::Kind::SqrtState ? "sqrt" : "constant") << "\"\ndiffusion_scale = "
     << num(e.model.diffusion.scale) << "\nz0 = " << num(e.model.z0) << "\n\n";
  const auto& t = e.train;
  os << "[train]\n"
     << "epochs = " << t.epochs << "\nbatch_size = " << t.batch_size << "\nmc_paths = " << t.mc_paths
     << "\nlr_theta = " << num(t.lr_theta) << "\nlr_beta = " << num(t.lr_beta) << "\nclip_norm = " << num(t.clip_norm)
     << "\nseed = " << t.seed << "\nrandom_horizon = " << (t.random_horizon ? "true" : "false")
     << "\nmax_updates = " << t.max_updates << "\n\n";
  const auto& m = e.mcmc;
  os << "[mcmc]\n"
     << "n_steps = " << m.n_steps << "\nburn_in = " << m.burn_in << "\nrho = " << num(m.rho)
     << "\nadapt = " << (m.adapt ? "true" : "false") << "\nthin = " << m.thin << "\nseed = " << m.seed << "\n\n";
  const auto& em = e.em;
  os << "[em]\n"
     << "iterations = " << em.iterations << "\ninitial_burn_in = " << em.initial_burn_in
     << "\nestep_steps = " << em.estep_steps << "\nsamples_per_obs = " << em.samples_per_obs << "\nrho = " << num(em.rho)
     << "\nmstep_steps = " << em.mstep_steps << "\nmstep_batch = " << em.mstep_batch << "\nlr = " << num(em.lr)
     << "\nclip_norm = " << num(em.clip_norm) << "\noptimizer = \""
     << (em.optimizer == EmConfig::Optimizer::Adam ? "adam" : "sgd") << "\"\nseed = " << em.seed << "\n";
  return os.str();
}

}  // namespace coxsde::io
