#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "coxsde/errors.hpp"
#include "coxsde/pathwise.hpp"
#include "coxsde/random.hpp"
#include "coxsde/sde.hpp"

namespace coxsde {
namespace {

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

TEST(TimeGrid, NodesAndOverlap) {
  const TimeGrid g(4.0, 100);
  EXPECT_EQ(g.size(), 101u);
  EXPECT_DOUBLE_EQ(g.dt(), 0.04);
  for (std::size_t j = 0; j < g.steps(); ++j) EXPECT_LT(g.node(j), g.node(j + 1));
  EXPECT_EQ(g.node(100), 4.0);
  EXPECT_DOUBLE_EQ(g.overlap(0, 0.0, 0.02), 0.02);
  EXPECT_DOUBLE_EQ(g.overlap(1, 0.0, 0.02), 0.0);
  const auto loc = g.locate(0.05);
  EXPECT_EQ(loc.index, 1u);
  EXPECT_NEAR(loc.weight, 0.25, 1e-12);
  EXPECT_EQ(g.locate(4.0).index, 99u);
  EXPECT_THROW(TimeGrid(0.0, 10), Error);
  EXPECT_THROW(TimeGrid(1.0, 0), Error);
}

TEST(Brownian, DeterministicInSeedAndShape) {
  const TimeGrid g(1.0, 4);
  const auto a = sample_brownian(g, 7), b = sample_brownian(g, 7), c = sample_brownian(g, 8);
  EXPECT_EQ(a.increments.size(), 4u);
  EXPECT_EQ(a.increments, b.increments);
  EXPECT_NE(a.increments, c.increments);
}

TEST(Brownian, TerminalMoments) {
  const TimeGrid g(1.0, 10);
  std::vector<double> bt(100000);
  for (std::size_t i = 0; i < bt.size(); ++i) {
    const auto p = sample_brownian(g, derive_seed(11, {i}));
    bt[i] = std::accumulate(p.increments.begin(), p.increments.end(), 0.0);
  }
  EXPECT_LE(std::abs(mean_of(bt)), 0.02);
  EXPECT_GE(var_of(bt), 0.97);
  EXPECT_LE(var_of(bt), 1.03);
}

TEST(EulerMaruyama, ZeroDynamicsIsConstant) {
  const TimeGrid g(1.0, 20);
  const auto spec = SdeSpec::from_affine({0, 0, 0}, Diffusion::constant(0.0), 5.0);
  const auto z = euler_maruyama(spec, sample_brownian(g, 1));
  for (double v : z.values) EXPECT_EQ(v, 5.0);
}

TEST(EulerMaruyama, OneStepCirArithmetic) {
  const TimeGrid g(4.0, 100);
  const auto spec = SdeSpec::cir(0.3, 80.0, 0.0, 5.0);
  const auto z = euler_maruyama(spec, sample_brownian(g, 1));
  EXPECT_NEAR(z.values[1], 5.9, 1e-12);
  EXPECT_EQ(z.values[0], 5.0);
}

TEST(EulerMaruyama, GenericAndAffinePathsAgree) {
  const TimeGrid g(4.0, 100);
  const auto affine = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  SdeSpec generic = affine;
  generic.affine.reset();
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto noise = sample_brownian(g, s);
    const auto a = euler_maruyama(affine, noise), b = euler_maruyama(generic, noise);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(a.values[j], b.values[j], 1e-12 * (1 + b.values[j]));
  }
}

TEST(EulerMaruyama, PositivityClamp) {
  const TimeGrid g(4.0, 100);
  // Strong downward drift forces the clamp.
  const auto spec = SdeSpec::from_affine({-50.0, 0.0, 0.0}, Diffusion::sqrt_state(1.0), 1.0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto z = euler_maruyama(spec, sample_brownian(g, s));
    for (double v : z.values) EXPECT_GE(v, kPositivityFloor);
    EXPECT_EQ(z.values.back(), kPositivityFloor);
  }
}

TEST(EulerMaruyama, NonFiniteStateIsReported) {
  const TimeGrid g(1.0, 50);
  const auto spec = SdeSpec::from_affine({0.0, 1e300, 0.0}, Diffusion::constant(0.0), 1.0);
  try {
    euler_maruyama(spec, sample_brownian(g, 1));
    FAIL() << "expected NonFiniteState";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteState);
    EXPECT_TRUE(e.is_numerical());
  }
}

// E[Z_t] = 80 + (z0 - 80) e^{-0.3 t} for the CIR law.
TEST(EulerMaruyama, CirMeanMatchesClosedForm) {
  const auto spec = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  const double exact = 80.0 - 75.0 * std::exp(-1.2);
  EXPECT_NEAR(exact, 57.41, 0.01);
  const std::size_t n = 2000;
  auto terminal = [&](std::size_t steps) {
    const TimeGrid g(4.0, steps);
    const auto v = simulate_ensemble(spec, g, n, 5);
    std::vector<double> zt(n);
    for (std::size_t i = 0; i < n; ++i) zt[i] = v[i * g.size() + steps];
    return zt;
  };
  const auto z100 = terminal(100);
  const double se = std::sqrt(var_of(z100) / n);
  EXPECT_LT(std::abs(mean_of(z100) - exact), 3 * se);
  // Halving dt moves the mean by less than two standard errors.
  const auto z200 = terminal(200);
  const double se2 = std::sqrt(var_of(z200) / n);
  EXPECT_LT(std::abs(mean_of(z200) - mean_of(z100)), 2 * std::hypot(se, se2));
}

TEST(EulerMaruyama, EnsembleUsesPerPathSeeds) {
  const TimeGrid g(4.0, 100);
  const auto spec = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  const auto v = simulate_ensemble(spec, g, 6, 42);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto z = euler_maruyama(spec, sample_brownian(g, derive_seed(42, {i})));
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_NEAR(v[i * g.size() + j], z.values[j], 1e-9 * (1 + z.values[j]));
  }
  EXPECT_EQ(v, simulate_ensemble(spec, g, 6, 42));
}

TEST(SimulatePosterior, ZeroCorrectionEqualsPrior) {
  const TimeGrid g(4.0, 100);
  const auto prior = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  const EventSequence ev({0.5, 1.0, 3.0}, 4.0);
  const DriftCorrection zero = [](double, double, double, const EventSequence&) { return 0.0; };
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto noise = sample_brownian(g, s);
    EXPECT_EQ(simulate_posterior(prior, zero, ev, 4.0, noise).values, euler_maruyama(prior, noise).values);
  }
}

TEST(SimulatePosterior, ZeroHorizonIsPrior) {
  const TimeGrid g(4.0, 100);
  const auto prior = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  const DriftCorrection big = [](double, double, double, const EventSequence&) { return 7.0; };
  const auto noise = sample_brownian(g, 3);
  EXPECT_EQ(simulate_posterior(prior, big, EventSequence({}, 0.0), 0.0, noise).values,
            euler_maruyama(prior, noise).values);
}

TEST(SimulatePosterior, CorrectionOnlyBeforeHorizon) {
  const TimeGrid g(4.0, 100);
  const auto prior = SdeSpec::from_affine({0, 0, 0}, Diffusion::constant(1.0), 5.0);
  const DriftCorrection c = [](double, double, double, const EventSequence&) { return 1.0; };
  const auto noise = sample_brownian(g, 9);
  const auto base = euler_maruyama(prior, noise);
  const auto post = simulate_posterior(prior, c, EventSequence({}, 2.0), 2.0, noise);
  // The drift 1 acts on [0, 2): the offset grows linearly there, then stays.
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_NEAR(post.values[j] - base.values[j], std::min(g.node(j), 2.0), 1e-9);
  }
}

TEST(SimulatePosterior, Errors) {
  const TimeGrid g(1.0, 10);
  const auto prior = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  const DriftCorrection zero = [](double, double, double, const EventSequence&) { return 0.0; };
  const auto noise = sample_brownian(g, 1);
  try {
    simulate_posterior(prior, zero, EventSequence({}, 2.0), 2.0, noise);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HorizonExceedsGrid);
  }
  try {
    simulate_posterior(prior, zero, EventSequence({0.9}, 1.0), 0.5, noise);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EventBeyondHorizon);
  }
}

TEST(SimulatePosterior, BrownianBridgePins) {
  const TimeGrid g(1.0, 1000);
  SdeSpec prior = SdeSpec::from_affine({0, 0, 0}, Diffusion::constant(1.0), 0.0);
  prior.floor = kNoFloor;
  const DriftCorrection bridge = [](double z, double t, double T, const EventSequence&) { return (0.0 - z) / (T - t); };
  std::size_t close = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto z = simulate_posterior(prior, bridge, EventSequence({}, 1.0), 1.0, sample_brownian(g, derive_seed(4, {i})));
    if (std::abs(z.values.back()) < 0.15) ++close;
  }
  EXPECT_GE(close, 990u);
}

// ---------------------------------------------------------------------------
// Sensitivities.

VariationalModel constant_drift_model(double theta) {
  VariationalModel m;
  m.drift = nn::PriorDrift::affine({theta, 0.0, 0.0});
  m.encoder = nn::DeepSetsEncoder::xavier({3, 4, 2}, {4, 4, 1}, 1);
  m.encoder.zero_output();
  m.diffusion = Diffusion::constant(1.0);
  m.z0 = 10.0;
  return m;
}

TEST(Augmented, ConstantDriftSensitivityIsTime) {
  const TimeGrid g(2.0, 50);
  const auto m = constant_drift_model(3.0);
  const auto aug = simulate_augmented(m, EventSequence({}, 2.0), 2.0, sample_brownian(g, 2));
  ASSERT_EQ(aug.p, 3u);
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_NEAR(aug.theta_row(j)[0], g.node(j), 1e-12);
  }
  for (double v : aug.theta_row(0)) EXPECT_EQ(v, 0.0);
}

VariationalModel small_neural_model(std::uint64_t seed) {
  VariationalModel m;
  m.drift = nn::PriorDrift::neural(nn::Mlp::xavier({2, 6, 1}, seed), 0.2, 3.0);
  m.encoder = nn::DeepSetsEncoder::xavier({3, 6, 3}, {5, 6, 1}, seed + 7, {0.2, 1.0, 0.5}, 0.5);
  m.diffusion = Diffusion::sqrt_state(1.0);
  m.z0 = 5.0;
  return m;
}

TEST(Augmented, UnusedParameterHasZeroSensitivity) {
  auto m = small_neural_model(3);
  // Hidden unit 2 of the drift no longer reaches the output.
  auto& net = const_cast<nn::Mlp&>(m.drift.net());
  net.weights(1)[2] = 0.0;
  m.drift = nn::PriorDrift::neural(net, 0.2, 3.0);
  const TimeGrid g(1.0, 40);
  const auto aug = simulate_augmented(m, EventSequence({0.3, 0.6}, 1.0), 1.0, sample_brownian(g, 5));
  const std::size_t w_row2 = m.drift.net().weight_offset(0) + 2 * 2;
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_EQ(aug.theta_row(j)[w_row2], 0.0);
    EXPECT_EQ(aug.theta_row(j)[w_row2 + 1], 0.0);
    EXPECT_EQ(aug.theta_row(j)[m.drift.net().bias_offset(0) + 2], 0.0);
  }
}

// Directional finite differences of the whole path along random parameter
// directions, with frozen noise.
TEST(Augmented, JacobiansMatchFiniteDifferencesAlongRandomDirections) {
  const TimeGrid g(1.0, 40);
  const EventSequence ev({0.15, 0.4, 0.55, 0.8}, 1.0);
  const auto noise = sample_brownian(g, 17);
  const auto base = small_neural_model(5);
  const std::size_t p = base.drift.param_count(), q = base.encoder.param_count();
  const auto aug = simulate_augmented(base, ev, 0.9, noise);
  Rng rng = make_rng(123);
  std::normal_distribution<double> gauss;
  const double h = 1e-5;
  for (int dir = 0; dir < 24; ++dir) {
    std::vector<double> dt(p), db(q);
    for (auto& v : dt) v = gauss(rng);
    for (auto& v : db) v = gauss(rng);
    auto shifted = [&](double s) {
      VariationalModel m = base;
      auto th = m.drift.params();
      for (std::size_t k = 0; k < p; ++k) th[k] += s * dt[k];
      auto be = m.encoder.params();
      for (std::size_t k = 0; k < q; ++k) be[k] += s * db[k];
      m.encoder.set_params(be);
      return simulate_model_posterior(m, ev, 0.9, noise);
    };
    const auto zp = shifted(h), zm = shifted(-h);
    for (std::size_t j = 1; j < g.size(); ++j) {
      const double fd = (zp.values[j] - zm.values[j]) / (2 * h);
      double an = 0.0;
      for (std::size_t k = 0; k < p; ++k) an += aug.theta_row(j)[k] * dt[k];
      for (std::size_t k = 0; k < q; ++k) an += aug.beta_row(j)[k] * db[k];
      EXPECT_LT(std::abs(an - fd) / (std::abs(fd) + 1e-8), 1e-3) << "dir " << dir << " node " << j;
    }
  }
}

TEST(Augmented, Deterministic) {
  const TimeGrid g(1.0, 30);
  const auto m = small_neural_model(9);
  const EventSequence ev({0.2, 0.7}, 1.0);
  const auto a = simulate_augmented(m, ev, 1.0, sample_brownian(g, 3));
  const auto b = simulate_augmented(m, ev, 1.0, sample_brownian(g, 3));
  EXPECT_EQ(a.z.values, b.z.values);
  EXPECT_EQ(a.j_theta, b.j_theta);
  EXPECT_EQ(a.j_beta, b.j_beta);
}

}  // namespace
}  // namespace coxsde
