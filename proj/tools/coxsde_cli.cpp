// Command-line driver: dataset generation, training, inference, baselines
// and evaluation. Every command writes into its --out directory and records
// content hashes of its inputs and outputs in run.json.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "coxsde/baselines.hpp"
#include "coxsde/cox.hpp"
#include "coxsde/ensemble.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/evaluation.hpp"
#include "coxsde/io/checkpoint.hpp"
#include "coxsde/io/config.hpp"
#include "coxsde/io/files.hpp"
#include "coxsde/random.hpp"
#include "coxsde/train.hpp"
#include "run_dir.hpp"

namespace fs = std::filesystem;
using namespace coxsde;
using cli::RunDir;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

// Reported alongside numerical failures.
std::uint64_t g_active_seed = 0;

struct Common {
  std::string out;
  std::string config;
  std::int64_t seed = -1;  // -1 keeps the configured seed
};

io::ExperimentConfig load_config(const Common& c, RunDir* run) {
  io::Config raw;
  if (!c.config.empty()) {
    const std::string text = io::read_file(c.config);
    raw = io::Config::parse(text, c.config);
    if (run) run->add_input("config", text);
  }
  io::ExperimentConfig e = io::load_experiment_config(raw);
  if (c.seed >= 0) {
    const auto s = static_cast<std::uint64_t>(c.seed);
    e.seed = s;
    e.train.seed = s;
    e.mcmc.seed = s;
    e.em.seed = s;
  }
  g_active_seed = c.seed >= 0 ? static_cast<std::uint64_t>(c.seed) : e.train.seed;
  return e;
}

std::vector<EventSequence> load_data(const std::string& dir, RunDir& run, nlohmann::json* manifest = nullptr) {
  nlohmann::json m;
  auto data = io::load_dataset(dir, &m);
  std::string joined;
  for (const auto& seq : data) joined += io::events_to_csv(seq);
  run.add_input("data", joined);
  if (manifest) *manifest = m;
  if (data.empty()) fail(ErrorCode::InvalidArgument, "dataset " + dir + " is empty");
  return data;
}

template <class F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

SdeSpec truth_from(const io::ExperimentConfig& e) { return SdeSpec::cir(e.kappa, e.mean, e.sigma, e.z0); }

// Sequence i uses noise seed (seed, i, 0) and event seed (seed, i, 1).
std::vector<EventSequence> simulate_cir(const SdeSpec& spec, double T, std::size_t steps, std::size_t n,
                                        std::uint64_t seed) {
  const TimeGrid grid(T, steps);
  std::vector<EventSequence> data;
  for (std::size_t i = 0; i < n; ++i) {
    const Trajectory z = euler_maruyama(spec, sample_brownian(grid, derive_seed(seed, {i, 0})));
    data.push_back(sample_cox(z, derive_seed(seed, {i, 1})));
  }
  return data;
}

// ---------------------------------------------------------------------------

struct GenerateOpts {
  Common c;
  std::string drift = "cir";
  double kappa = 0.3, mean = 80.0, sigma = 1.0, z0 = 5.0, T = 4.0;
  std::size_t n = 256, steps = 100;
  std::string minutes;
  double thinning = 0.001;
  double rescale = io::kMinuteRescale;
};

int run_generate(const GenerateOpts& o) {
  RunDir run(o.c.out, "generate");
  const std::uint64_t seed = o.c.seed >= 0 ? static_cast<std::uint64_t>(o.c.seed) : 0;
  std::vector<EventSequence> data;
  nlohmann::json manifest;
  manifest["seed"] = seed;
  g_active_seed = seed;
  if (!o.minutes.empty()) {
    const std::string text = io::read_file(o.minutes);
    run.add_input("minutes", text);
    const auto days = io::minute_counts_from_csv(text);
    for (std::size_t d = 0; d < days.size(); ++d) {
      data.push_back(io::spread_and_thin(days[d], o.thinning, derive_seed(seed, {d}), o.rescale));
    }
    manifest["generator"] = {{"source", "minute_counts"},
                             {"thinning", o.thinning},
                             {"rescale", o.rescale},
                             {"days", days.size()}};
  } else {
    if (o.drift != "cir") fail(ErrorCode::ConfigError, "field 'drift' must be \"cir\"");
    data = simulate_cir(SdeSpec::cir(o.kappa, o.mean, o.sigma, o.z0), o.T, o.steps, o.n, seed);
    manifest["generator"] = {{"source", "simulation"}, {"drift", o.drift}, {"kappa", o.kappa}, {"mean", o.mean},
                             {"sigma", o.sigma},       {"z0", o.z0},       {"steps", o.steps}};
  }
  run.set("args", manifest["generator"]);
  io::save_dataset(run.root(), data, manifest);
  for (std::size_t i = 0; i < data.size(); ++i) run.add_input("seq" + std::to_string(i), io::events_to_csv(data[i]));
  run.set("seed", seed);
  run.finish();
  std::cout << "wrote " << data.size() << " sequences to " << o.c.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainOpts {
  Common c;
  std::string data;
  std::string resume;
  std::int64_t epochs = -1;
};

int run_train(const TrainOpts& o) {
  RunDir run(o.c.out, "train");
  io::ExperimentConfig e = load_config(o.c, &run);
  if (o.epochs >= 0) e.train.epochs = static_cast<std::size_t>(o.epochs);
  std::vector<EventSequence> data;
  if (o.data.empty()) {
    // No dataset given: simulate the [data] section of the configuration.
    data = simulate_cir(truth_from(e), e.horizon, e.steps, e.n, e.seed);
    std::string joined;
    for (const auto& seq : data) joined += io::events_to_csv(seq);
    run.add_input("data", joined);
  } else {
    data = load_data(o.data, run);
  }
  TrainState state;
  if (!o.resume.empty()) {
    const std::string text = io::read_file(o.resume);
    run.add_input("resume", text);
    state = io::checkpoint_from_json(nlohmann::json::parse(text));
  } else {
    state = init_train_state(make_model(e.model, data_scale(data), derive_seed(e.train.seed, {0x4d4fULL})), e.train);
  }
  train(state, data, e.train, [](const TrainState& s) {
    const auto& r = s.history.back();
    std::cerr << "epoch " << r.epoch << " elbo " << r.elbo_mean << " +- " << r.elbo_se;
    if (r.skipped_batches) std::cerr << " skipped " << r.skipped_batches << " batch(es)";
    std::cerr << "\n";
  });
  run.write("config.toml", io::to_toml(e));
  run.write("checkpoint.json", io::checkpoint_to_json(state, e.train.seed).dump(1) + "\n");
  run.write("history.csv", render([&](std::ostream& os) { write_history_csv(os, state.history); }));
  run.set("seed", e.train.seed);
  run.finish();
  return 0;
}

// ---------------------------------------------------------------------------

struct InferOpts {
  Common c;
  std::string checkpoint, data;
  std::size_t index = 0;
  double horizon = -1.0;
  std::size_t paths = 32;
};

int run_infer(const InferOpts& o) {
  RunDir run(o.c.out, "infer");
  const io::ExperimentConfig e = load_config(o.c, &run);
  const std::string ck = io::read_file(o.checkpoint);
  run.add_input("checkpoint", ck);
  const TrainState st = io::checkpoint_from_json(nlohmann::json::parse(ck));
  const auto data = load_data(o.data, run);
  if (o.index >= data.size()) fail(ErrorCode::InvalidArgument, "index beyond the dataset");
  const EventSequence& full = data[o.index];
  const double T = full.horizon();
  const double h = o.horizon < 0.0 ? T : o.horizon;
  const TimeGrid grid(T, e.steps);
  const std::uint64_t seed = o.c.seed >= 0 ? static_cast<std::uint64_t>(o.c.seed) : 0;
  const PathEnsemble ens = sample_amortized_posterior(st.model, full.truncated(h), h, grid, o.paths, seed);
  run.write("ensemble.csv", render([&](std::ostream& os) { write_ensemble_csv(os, ens); }));
  run.write("summary.csv", render([&](std::ostream& os) { write_summary_csv(os, summarize(ens)); }));
  nlohmann::json pred = {{"horizon", h}, {"index", o.index}};
  if (h < T) pred["predictive_ll"] = posterior_predictive_ll(ens, full, h, T);
  run.write("predictive.json", pred.dump(2) + "\n");
  run.set("seed", seed);
  run.finish();
  return 0;
}

// ---------------------------------------------------------------------------

struct McmcOpts {
  Common c;
  std::string data, checkpoint;
  std::size_t index = 0;
  double horizon = -1.0;
};

int run_mcmc(const McmcOpts& o) {
  RunDir run(o.c.out, "baseline-mcmc");
  const io::ExperimentConfig e = load_config(o.c, &run);
  const auto data = load_data(o.data, run);
  if (o.index >= data.size()) fail(ErrorCode::InvalidArgument, "index beyond the dataset");
  SdeSpec prior = truth_from(e);
  if (!o.checkpoint.empty()) {
    const std::string ck = io::read_file(o.checkpoint);
    run.add_input("checkpoint", ck);
    prior = io::checkpoint_from_json(nlohmann::json::parse(ck)).model.prior_spec();
  }
  const EventSequence& full = data[o.index];
  const double T = full.horizon();
  const double h = o.horizon < 0.0 ? T : o.horizon;
  const TimeGrid grid(T, e.steps);
  const MhResult r = mh_posterior_sampler(prior, full.truncated(h), h, grid, e.mcmc);
  if (r.diagnostics.zero_acceptance) std::cerr << "warning: burn-in acceptance below 0.5%\n";
  run.write("config.toml", io::to_toml(e));
  run.write("ensemble.csv", render([&](std::ostream& os) { write_ensemble_csv(os, r.ensemble); }));
  run.write("summary.csv", render([&](std::ostream& os) { write_summary_csv(os, summarize(r.ensemble)); }));
  run.write("chain.csv", render([&](std::ostream& os) { write_chain_csv(os, r.diagnostics); }));
  nlohmann::json diag = {{"burn_in_acceptance", r.diagnostics.burn_in_acceptance},
                         {"acceptance", r.diagnostics.acceptance},
                         {"final_rho", r.diagnostics.final_rho},
                         {"zero_acceptance", r.diagnostics.zero_acceptance}};
  if (h < T) diag["predictive_ll"] = posterior_predictive_ll(r.ensemble, full, h, T);
  run.write("diagnostics.json", diag.dump(2) + "\n");
  run.set("seed", e.mcmc.seed);
  run.finish();
  return 0;
}

// ---------------------------------------------------------------------------

struct EmOpts {
  Common c;
  std::string data;
};

int run_em(const EmOpts& o) {
  RunDir run(o.c.out, "baseline-em");
  const io::ExperimentConfig e = load_config(o.c, &run);
  const auto data = load_data(o.data, run);
  const VariationalModel init = make_model(e.model, data_scale(data), derive_seed(e.em.seed, {0x4d4fULL}));
  const EmResult r = em_fit(data, init.drift, e.model.diffusion, e.model.z0, e.em);
  run.write("config.toml", io::to_toml(e));
  nlohmann::json out = {{"format_version", io::kCheckpointVersion},
                        {"drift", io::to_json(r.drift)},
                        {"diffusion", {{"kind", e.model.diffusion.kind == Diffusion::Kind::SqrtState ? "sqrt" : "constant"},
                                       {"scale", e.model.diffusion.scale}}},
                        {"z0", e.model.z0}};
  run.write("em_drift.json", out.dump(1) + "\n");
  run.write("history.csv", render([&](std::ostream& os) {
              os << "iteration,objective,grad_norm,acceptance\n";
              for (const auto& h : r.history) {
                os << h.iteration << ',' << io::format_double(h.objective) << ',' << io::format_double(h.grad_norm)
                   << ',' << io::format_double(h.acceptance) << '\n';
              }
            }));
  run.set("seed", e.em.seed);
  run.finish();
  return 0;
}

// ---------------------------------------------------------------------------

struct StatsOpts {
  Common c;
  std::string data;
  double bin_width = 10.0 * io::kMinuteRescale;
  double at = -1.0;
  std::vector<double> deltas;
  std::size_t bootstrap = 200;
};

int run_stats(const StatsOpts& o) {
  RunDir run(o.c.out, "stats");
  const auto data = load_data(o.data, run);
  const double T = data.front().horizon();
  const std::uint64_t seed = o.c.seed >= 0 ? static_cast<std::uint64_t>(o.c.seed) : 0;

  std::vector<std::vector<std::int64_t>> counts;
  for (const auto& seq : data) counts.push_back(bin_counts(seq, o.bin_width).counts);
  run.write("counts.csv", render([&](std::ostream& os) {
              os << "bin_start,mean,variance\n";
              const std::size_t bins = counts.front().size();
              const double n = static_cast<double>(counts.size());
              for (std::size_t b = 0; b < bins; ++b) {
                double s = 0.0, ss = 0.0;
                for (const auto& c : counts) s += static_cast<double>(c[b]);
                const double mean = s / n;
                for (const auto& c : counts) ss += (static_cast<double>(c[b]) - mean) * (static_cast<double>(c[b]) - mean);
                os << io::format_double(static_cast<double>(b) * o.bin_width) << ',' << io::format_double(mean) << ','
                   << io::format_double(n > 1 ? ss / (n - 1.0) : 0.0) << '\n';
              }
            }));

  const double at = o.at < 0.0 ? T / 2.0 : o.at;
  std::vector<double> deltas = o.deltas;
  if (deltas.empty()) {
    for (int k = 1; k <= 8; ++k) deltas.push_back((T - at) * k / 8.0);
  }
  const DispersionAnalysis a = analyze_dispersion(data, deltas, at, o.bootstrap, seed);
  run.write("dispersion.csv", render([&](std::ostream& os) {
              os << "delta,variance_mean_ratio\n";
              for (const auto& m : a.curve) os << io::format_double(m.delta) << ',' << io::format_double(m.dispersion_index()) << '\n';
            }));
  nlohmann::json fit = {{"at", at},
                        {"linear", a.linear},
                        {"quadratic", a.quadratic},
                        {"quadratic_se", a.quadratic_se},
                        {"index_se", a.index_se}};
  run.write("dispersion_fit.json", fit.dump(2) + "\n");
  run.set("seed", seed);
  run.set("args", {{"bin_width", o.bin_width}, {"at", at}, {"deltas", deltas}, {"bootstrap", o.bootstrap}});
  run.finish();
  return 0;
}

// ---------------------------------------------------------------------------

struct BridgeOpts {
  Common c;
  double T = 1.0;
  std::size_t M = 1000, paths = 1000;
  double pin = 0.0, start = 0.0;
};

int run_bridge(const BridgeOpts& o) {
  RunDir run(o.c.out, "bridge-check");
  const std::uint64_t seed = o.c.seed >= 0 ? static_cast<std::uint64_t>(o.c.seed) : 0;
  const BridgeReport r = brownian_bridge_decomposition_check(o.T, o.M, o.paths, seed, o.pin, o.start);
  run.write("bridge.csv", render([&](std::ostream& os) { write_bridge_report(os, r); }));
  run.set("seed", seed);
  run.set("args", {{"T", o.T}, {"M", o.M}, {"paths", o.paths}, {"pin", o.pin}, {"start", o.start}});
  run.finish();
  const bool ok = r.mean_ok() && r.variance_ok() && r.pinned();
  std::cout << (ok ? "bridge check passed" : "bridge check FAILED") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalOpts {
  Common c;
  std::string mode;
  std::string checkpoint, em_checkpoint, data;
  std::vector<double> horizons = {0.0, 0.25, 0.5, 0.75};
  std::vector<double> budgets;
  std::vector<double> sizes = {4, 8, 16, 32, 64};
  std::size_t paths = 0;
  std::size_t max_obs = 0;
};

int run_evaluate(const EvalOpts& o) {
  RunDir run(o.c.out, "evaluate");
  const io::ExperimentConfig e = load_config(o.c, &run);
  const std::uint64_t seed = o.c.seed >= 0 ? static_cast<std::uint64_t>(o.c.seed) : 0;
  run.set("mode", o.mode);
  run.set("seed", seed);
  auto load_model = [&](const std::string& path, const std::string& label) {
    if (path.empty()) fail(ErrorCode::ConfigError, "field 'checkpoint' is required for this mode");
    const std::string text = io::read_file(path);
    run.add_input(label, text);
    return nlohmann::json::parse(text);
  };

  if (o.mode == "deviation") {
    const TimeGrid grid(e.horizon, e.steps);
    const SdeSpec truth = truth_from(e);
    const std::size_t n = o.paths ? o.paths : 64;
    std::vector<DeviationRow> rows;
    if (!o.checkpoint.empty()) {
      const auto model = io::checkpoint_from_json(load_model(o.checkpoint, "checkpoint")).model;
      rows.push_back({"cir", "vi", prior_l2_deviation(model.prior_spec(), truth, grid, n, seed)});
    }
    if (!o.em_checkpoint.empty()) {
      const auto j = load_model(o.em_checkpoint, "em_checkpoint");
      const auto drift = io::drift_from_json(j.at("drift"));
      rows.push_back({"cir", "em", prior_l2_deviation(drift.to_sde(e.model.diffusion, j.at("z0")), truth, grid, n, seed)});
    }
    if (rows.empty()) fail(ErrorCode::ConfigError, "field 'checkpoint' or 'em-checkpoint' is required for deviation");
    run.write("deviation.csv", render([&](std::ostream& os) { write_deviation_csv(os, rows); }));
  } else if (o.mode == "timing") {
    const auto model = io::checkpoint_from_json(load_model(o.checkpoint, "checkpoint")).model;
    auto data = load_data(o.data, run);
    if (o.max_obs && data.size() > o.max_obs) data.resize(o.max_obs);
    TimingProtocol p;
    p.steps = e.steps;
    p.mcmc = e.mcmc;
    p.seed = seed;
    if (o.paths) p.paths = o.paths;
    if (!o.budgets.empty()) p.mcmc_budgets.assign(o.budgets.begin(), o.budgets.end());
    const auto rows = timing_harness(model, data, o.horizons, p);
    run.write("timing.csv", render([&](std::ostream& os) { write_timing_csv(os, rows); }));
  } else if (o.mode == "wasserstein") {
    const auto model = io::checkpoint_from_json(load_model(o.checkpoint, "checkpoint")).model;
    auto data = load_data(o.data, run);
    if (o.max_obs && data.size() > o.max_obs) data.resize(o.max_obs);
    const TimeGrid grid(data.front().horizon(), e.steps);
    const SdeSpec truth = truth_from(e);
    run.write("wasserstein.csv", render([&](std::ostream& os) {
                os << "index,wasserstein\n";
                for (std::size_t i = 0; i < data.size(); ++i) {
                  MhConfig mh = e.mcmc;
                  mh.seed = derive_seed(seed, {1, i});
                  const MhResult r = mh_posterior_sampler(truth, data[i], grid.t_end(), grid, mh);
                  const PathEnsemble q = sample_amortized_posterior(model, data[i], grid.t_end(), grid, r.ensemble.n,
                                                                    derive_seed(seed, {2, i}));
                  os << i << ',' << io::format_double(wasserstein2(q, r.ensemble).cost) << '\n';
                }
              }));
  } else if (o.mode == "gap") {
    GapProtocol p;
    p.truth = truth_from(e);
    p.horizon = e.horizon;
    p.steps = e.steps;
    p.mcmc = e.mcmc;
    p.model = e.model;
    p.train = e.train;
    p.seed = seed;
    if (o.paths) p.ensemble = o.paths;
    if (e.train.max_updates) p.updates = e.train.max_updates;
    std::vector<std::size_t> sizes;
    for (double s : o.sizes) sizes.push_back(static_cast<std::size_t>(s));
    const auto rows = amortization_gap_study(sizes, p);
    run.write("gap.csv", render([&](std::ostream& os) { write_gap_csv(os, rows); }));
  } else {
    fail(ErrorCode::ConfigError, "field 'mode' must be one of deviation, timing, wasserstein, gap");
  }
  run.write("config.toml", io::to_toml(e));
  run.finish();
  return 0;
}

void add_common(CLI::App* app, Common& c, bool with_config) {
  app->add_option("--out", c.out, "Output directory")->required();
  if (with_config) app->add_option("--config", c.config, "TOML configuration file");
  app->add_option("--seed", c.seed, "Seed (overrides the configuration)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffusion-driven Cox process modelling with amortized variational inference"};
  app.require_subcommand(1);

  GenerateOpts gen;
  auto* g = app.add_subcommand("generate", "Simulate a Cox dataset or ingest minute counts");
  add_common(g, gen.c, false);
  g->add_option("--drift", gen.drift, "Ground-truth drift family");
  g->add_option("--kappa", gen.kappa);
  g->add_option("--mean", gen.mean);
  g->add_option("--sigma", gen.sigma, "Diffusion scale of sigma sqrt(z)");
  g->add_option("--z0", gen.z0);
  g->add_option("--T", gen.T, "Horizon");
  g->add_option("--n", gen.n, "Number of sequences");
  g->add_option("--steps", gen.steps, "Grid steps of the latent simulation");
  g->add_option("--minutes", gen.minutes, "CSV of per-minute counts (day,minute,count)");
  g->add_option("--thinning", gen.thinning, "Keep probability for minute-count ingestion");
  g->add_option("--rescale", gen.rescale, "Time units per minute");

  TrainOpts tr;
  auto* t = app.add_subcommand("train", "Fit prior drift and posterior encoder");
  add_common(t, tr.c, true);
  t->add_option("--data", tr.data, "Dataset directory (default: simulate from the [data] section)");
  t->add_option("--resume", tr.resume, "Checkpoint to continue from");
  t->add_option("--epochs", tr.epochs);

  InferOpts inf;
  auto* in = app.add_subcommand("infer", "Sample the amortized posterior for one observation");
  add_common(in, inf.c, true);
  in->add_option("--checkpoint", inf.checkpoint)->required();
  in->add_option("--data", inf.data)->required();
  in->add_option("--index", inf.index);
  in->add_option("--horizon", inf.horizon, "Conditioning horizon (default: full)");
  in->add_option("--paths", inf.paths);

  EvalOpts ev;
  auto* e = app.add_subcommand("evaluate", "Metrics: deviation, timing, wasserstein, gap");
  add_common(e, ev.c, true);
  e->add_option("--mode", ev.mode)->required();
  e->add_option("--checkpoint", ev.checkpoint);
  e->add_option("--em-checkpoint", ev.em_checkpoint);
  e->add_option("--data", ev.data);
  e->add_option("--horizons", ev.horizons)->delimiter(',');
  e->add_option("--budgets", ev.budgets)->delimiter(',');
  e->add_option("--sizes", ev.sizes)->delimiter(',');
  e->add_option("--paths", ev.paths);
  e->add_option("--max-obs", ev.max_obs);

  McmcOpts mc;
  auto* m = app.add_subcommand("baseline-mcmc", "Metropolis-Hastings posterior for one observation");
  add_common(m, mc.c, true);
  m->add_option("--data", mc.data)->required();
  m->add_option("--checkpoint", mc.checkpoint, "Use the learned prior instead of the configured CIR law");
  m->add_option("--index", mc.index);
  m->add_option("--horizon", mc.horizon);

  EmOpts em;
  auto* emc = app.add_subcommand("baseline-em", "Fit the prior drift by Monte Carlo EM");
  add_common(emc, em.c, true);
  emc->add_option("--data", em.data)->required();

  StatsOpts st;
  auto* s = app.add_subcommand("stats", "Count moments and dispersion analysis");
  add_common(s, st.c, false);
  s->add_option("--data", st.data)->required();
  s->add_option("--bin-width", st.bin_width);
  s->add_option("--at", st.at);
  s->add_option("--deltas", st.deltas)->delimiter(',');
  s->add_option("--bootstrap", st.bootstrap);

  BridgeOpts br;
  auto* b = app.add_subcommand("bridge-check", "Brownian bridge as a drift-corrected diffusion");
  add_common(b, br.c, false);
  b->add_option("--T", br.T);
  b->add_option("--M", br.M);
  b->add_option("--paths", br.paths);
  b->add_option("--pin", br.pin);
  b->add_option("--start", br.start);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (g->parsed()) return run_generate(gen);
    if (t->parsed()) return run_train(tr);
    if (in->parsed()) return run_infer(inf);
    if (e->parsed()) return run_evaluate(ev);
    if (m->parsed()) return run_mcmc(mc);
    if (emc->parsed()) return run_em(em);
    if (s->parsed()) return run_stats(st);
    if (b->parsed()) return run_bridge(br);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    if (err.is_numerical()) {
      std::cerr << "failing seed: " << g_active_seed << "\n";
      return kExitNumerical;
    }
    if (err.code() == ErrorCode::ConfigError || err.code() == ErrorCode::InvalidArgument) return kExitConfig;
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
