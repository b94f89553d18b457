#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <vector>

#include "coxsde/cox.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/io/checkpoint.hpp"
#include "coxsde/io/config.hpp"
#include "coxsde/io/files.hpp"
#include "coxsde/random.hpp"

namespace coxsde::io {
namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("coxsde_test_io_" + name);
  fs::remove_all(p);
  return p;
}

std::optional<ErrorCode> code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

std::string message_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(Config, ParsesScalarsArraysAndComments) {
  const auto c = Config::parse(
      "# leading comment\n"
      "top = 1\n"
      "[data]\n"
      "n = 1_000   # trailing\n"
      "horizon = 4.5\n"
      "name = \"a # b\"\n"
      "flag = true\n"
      "[model]\n"
      "sizes = [2, 64, 1]\n"
      "empty = []\n");
  EXPECT_EQ(c.get_int("top", 0), 1);
  EXPECT_EQ(c.get_int("data.n", 0), 1000);
  EXPECT_EQ(c.get_double("data.horizon", 0), 4.5);
  EXPECT_EQ(c.get_double("data.n", 0), 1000.0);
  EXPECT_EQ(c.get_string("data.name", ""), "a # b");
  EXPECT_TRUE(c.get_bool("data.flag", false));
  EXPECT_EQ(c.get_array("model.sizes", {}), (std::vector<double>{2, 64, 1}));
  EXPECT_TRUE(c.get_array("model.empty", {1.0}).empty());
  EXPECT_EQ(c.get_int("missing.key", 7), 7);
}

TEST(Config, SyntaxErrorsAreConfigErrors) {
  for (const char* text : {"[data\n", "novalue\n", "x =\n", "x = \"open\n", "x = [1, 2\n", "x = abc\n", "x = [1, a]\n",
                           "x = 1\nx = 2\n", " = 3\n"}) {
    EXPECT_EQ(code_of([&] { Config::parse(text); }), ErrorCode::ConfigError) << text;
  }
  EXPECT_NE(message_of([] { Config::parse("a = 1\nb = zz\n", "f.toml"); }).find("f.toml:2"), std::string::npos);
}

TEST(Config, TypeErrorsNameTheField) {
  const auto c = Config::parse("[train]\nepochs = 1.5\nseed = \"x\"\n");
  const auto msg = message_of([&] { c.get_int("train.epochs", 0); });
  EXPECT_NE(msg.find("train.epochs"), std::string::npos);
  EXPECT_EQ(code_of([&] { c.get_double("train.seed", 0); }), ErrorCode::ConfigError);
}

TEST(ExperimentConfig, DefaultsAndOverrides) {
  const auto e = load_experiment_config(Config::parse("[data]\nn = 12\n[train]\nepochs = 3\nlr_beta = 0.01\n"));
  EXPECT_EQ(e.n, 12u);
  EXPECT_EQ(e.train.epochs, 3u);
  EXPECT_EQ(e.train.lr_beta, 0.01);
  EXPECT_EQ(e.horizon, 4.0);
  EXPECT_EQ(e.steps, 100u);
  EXPECT_EQ(e.model.drift_sizes, (std::vector<std::size_t>{2, 64, 64, 1}));
}

TEST(ExperimentConfig, RejectsUnknownAndInvalidFields) {
  const auto unknown = message_of([] { load_experiment_config(Config::parse("[train]\nepochz = 3\n")); });
  EXPECT_NE(unknown.find("train.epochz"), std::string::npos);
  for (const char* text : {"[data]\nhorizon = -1\n", "[data]\nn = 0\n", "[data]\nthinning = 2.0\n",
                           "[model]\ndrift_sizes = [3, 8, 1]\n", "[model]\nrho_sizes = [5, 8, 1]\n",
                           "[mcmc]\nrho = 1.5\n", "[mcmc]\nn_steps = 10\nburn_in = 10\n", "[em]\noptimizer = \"lbfgs\"\n",
                           "[model]\ndiffusion = \"cubic\"\n", "[data]\ndrift = \"ou\"\n"}) {
    EXPECT_EQ(code_of([&] { load_experiment_config(Config::parse(text)); }), ErrorCode::ConfigError) << text;
  }
}

TEST(ExperimentConfig, TomlRoundTrip) {
  auto e = load_experiment_config(Config::parse(
      "[data]\nkappa = 0.25\nseed = 9\n[model]\npsi_sizes = [3, 16, 8]\nrho_sizes = [10, 16, 1]\n"
      "diffusion = \"constant\"\n[train]\nrandom_horizon = true\n[em]\noptimizer = \"sgd\"\n"));
  const std::string text = to_toml(e);
  const auto back = load_experiment_config(Config::parse(text));
  EXPECT_EQ(to_toml(back), text);
  EXPECT_EQ(back.kappa, 0.25);
  EXPECT_EQ(back.model.psi_sizes, (std::vector<std::size_t>{3, 16, 8}));
  EXPECT_EQ(back.model.diffusion.kind, Diffusion::Kind::Constant);
  EXPECT_TRUE(back.train.random_horizon);
  EXPECT_EQ(back.em.optimizer, EmConfig::Optimizer::Sgd);
}

TEST(Files, FormatDoubleRoundTrips) {
  Rng rng = make_rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(i % 40) - 20);
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Files, ContentHashMatchesGitBlobIds) {
  EXPECT_EQ(content_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(content_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Files, AtomicWriteAndRead) {
  const auto dir = scratch("atomic");
  const auto path = dir / "nested" / "out.txt";
  atomic_write(path, "first");
  atomic_write(path, "second\n");
  EXPECT_EQ(read_file(path), "second\n");
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
  EXPECT_EQ(code_of([&] { read_file(dir / "absent.txt"); }), ErrorCode::IoError);
  fs::remove_all(dir);
}

TEST(Files, EventsCsvRoundTrip) {
  const EventSequence ev({0.1, 1.0 / 3.0, 2.718281828459045, 4.0}, 4.0);
  const std::string text = events_to_csv(ev);
  EXPECT_EQ(text.substr(0, text.find('\n', text.find('\n') + 1)), "# horizon=4\ntau");
  EXPECT_EQ(events_from_csv(text), ev);
  EXPECT_EQ(events_from_csv(events_to_csv(EventSequence({}, 2.5))), EventSequence({}, 2.5));
  EXPECT_EQ(code_of([] { events_from_csv("tau\n0.5\n"); }), ErrorCode::IoError);
  EXPECT_EQ(code_of([] { events_from_csv("# horizon=1\ntime\n0.5\n"); }), ErrorCode::IoError);
  EXPECT_EQ(code_of([] { events_from_csv("# horizon=1\ntau\nx\n"); }), ErrorCode::IoError);
}

TEST(Files, DatasetRoundTrip) {
  const auto dir = scratch("dataset");
  const TimeGrid g(4.0, 100);
  const auto spec = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  std::vector<EventSequence> data;
  for (std::size_t i = 0; i < 5; ++i) {
    data.push_back(sample_cox(euler_maruyama(spec, sample_brownian(g, derive_seed(8, {i, 0}))), derive_seed(8, {i, 1})));
  }
  save_dataset(dir, data, {{"generator", "cir"}});
  nlohmann::json manifest;
  const auto back = load_dataset(dir, &manifest);
  EXPECT_EQ(back, data);
  EXPECT_EQ(manifest["n"], 5);
  EXPECT_EQ(manifest["T"], 4.0);
  EXPECT_EQ(manifest["generator"], "cir");
  EXPECT_EQ(code_of([&] { load_dataset(dir / "missing"); }), ErrorCode::IoError);
  fs::remove_all(dir);
}

TEST(Files, MinuteCounts) {
  const auto days = minute_counts_from_csv("day,minute,count\nmon,0,3\nmon,5,2\ntue,1439,1\nmon,5,1\n");
  ASSERT_EQ(days.size(), 2u);
  EXPECT_EQ(days[0].day, "mon");
  EXPECT_EQ(days[0].counts[0], 3);
  EXPECT_EQ(days[0].counts[5], 3);
  EXPECT_EQ(days[1].counts[1439], 1);
  EXPECT_EQ(code_of([] { minute_counts_from_csv("day,minute,count\nmon,1440,1\n"); }), ErrorCode::IoError);
  EXPECT_EQ(code_of([] { minute_counts_from_csv("day,minute,count\nmon,3,-1\n"); }), ErrorCode::IoError);
  EXPECT_EQ(code_of([] { minute_counts_from_csv("d,m,c\n"); }), ErrorCode::IoError);
}

TEST(SpreadAndThin, Examples) {
  MinuteCounts day;
  day.counts[10] = 2;
  const auto all = spread_and_thin(day, 1.0, 1, 1.0);
  EXPECT_EQ(std::vector<double>(all.times().begin(), all.times().end()), (std::vector<double>{10.25, 10.75}));
  EXPECT_EQ(all.horizon(), 1440.0);
  const auto scaled = spread_and_thin(day, 1.0, 1);
  EXPECT_DOUBLE_EQ(scaled.times()[0], 10.25 * kMinuteRescale);
  EXPECT_DOUBLE_EQ(scaled.horizon(), 4.0);
  EXPECT_TRUE(spread_and_thin(day, 0.0, 1).empty());
  EXPECT_EQ(code_of([&] { spread_and_thin(day, 1.5, 1); }), ErrorCode::InvalidArgument);
}

TEST(SpreadAndThin, ThinningKeepsBinomialFraction) {
  MinuteCounts day;
  for (std::size_t m = 0; m < 1440; ++m) day.counts[m] = m < 1000 ? 139 : 152;  // 200_000 total, roughly uniform
  std::int64_t total = 0;
  for (auto c : day.counts) total += c;
  ASSERT_EQ(total, 139000 + 440 * 152);
  const auto kept = spread_and_thin(day, 0.001, 17);
  const double mean = 0.001 * static_cast<double>(total);
  EXPECT_LT(std::abs(static_cast<double>(kept.size()) - mean), 3.0 * std::sqrt(mean));
  EXPECT_EQ(spread_and_thin(day, 0.001, 17), kept);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const TimeGrid g(4.0, 50);
  const auto spec = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  std::vector<EventSequence> data;
  for (std::size_t i = 0; i < 4; ++i) {
    data.push_back(sample_cox(euler_maruyama(spec, sample_brownian(g, derive_seed(2, {i, 0}))), derive_seed(2, {i, 1})));
  }
  ModelConfig mc;
  mc.drift_sizes = {2, 6, 1};
  mc.psi_sizes = {3, 6, 4};
  mc.rho_sizes = {6, 6, 1};
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 2;
  tc.mc_paths = 2;
  tc.steps = 50;
  tc.seed = 4;
  auto state = init_train_state(make_model(mc, data_scale(data), 3), tc);
  train(state, data, tc);
  ASSERT_GT(state.updates, 0u);

  const std::string text = checkpoint_to_json(state, 123).dump();
  std::uint64_t seed = 0;
  const auto back = checkpoint_from_json(nlohmann::json::parse(text), &seed);
  EXPECT_EQ(seed, 123u);
  EXPECT_TRUE(back == state);
  EXPECT_EQ(checkpoint_to_json(back, 123).dump(), text);

  auto bad = nlohmann::json::parse(text);
  bad["format_version"] = 99;
  EXPECT_EQ(code_of([&] { checkpoint_from_json(bad); }), ErrorCode::IoError);
}

TEST(Checkpoint, AffineDriftRoundTrip) {
  const auto d = nn::PriorDrift::affine({24.0, -0.3, 1e-17});
  const auto back = drift_from_json(nlohmann::json::parse(to_json(d).dump()));
  const auto a = back.params(), b = d.params();
  EXPECT_EQ(std::vector<double>(a.begin(), a.end()), std::vector<double>(b.begin(), b.end()));
}

}  // namespace
}  // namespace coxsde::io
