#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "coxsde/cox.hpp"
#include "coxsde/elbo.hpp"
#include "coxsde/ensemble.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/pathwise.hpp"
#include "coxsde/random.hpp"
#include "coxsde/train.hpp"

namespace coxsde {
namespace {

// Encoder whose output is the constant c (rho weights zero, output bias c).
nn::DeepSetsEncoder constant_encoder(double c) {
  auto enc = nn::DeepSetsEncoder::xavier({3, 4, 2}, {4, 4, 1}, 3);
  enc.zero_output();
  nn::Mlp rho = enc.rho();
  rho.bias(1)[0] = c;
  return nn::DeepSetsEncoder(enc.psi(), rho, enc.scales());
}

VariationalModel cir_model(double c) {
  VariationalModel m;
  m.drift = nn::PriorDrift::affine({24.0, -0.3, 0.0});
  m.encoder = constant_encoder(c);
  m.diffusion = Diffusion::sqrt_state(1.0);
  m.z0 = 5.0;
  return m;
}

TEST(Elbo, ZeroCorrectionHasNoKl) {
  const auto m = cir_model(0.0);
  const TimeGrid g(4.0, 100);
  const EventSequence ev({0.5, 1.5, 2.0}, 4.0);
  const auto e = estimate_elbo(m, ev, 4.0, g, 200, 1);
  EXPECT_EQ(e.kl_term, 0.0);
  EXPECT_DOUBLE_EQ(e.value, e.likelihood_term);
  // The likelihood term is the prior expectation of the log-likelihood.
  const auto prior = sample_prior(m.prior_spec(), g, 200, 1);
  double ll = 0.0;
  for (std::size_t i = 0; i < 200; ++i) ll += poisson_loglik(prior.trajectory(i), ev, 4.0);
  EXPECT_NEAR(e.likelihood_term, ll / 200, 1e-9 * std::abs(ll / 200));
}

TEST(Elbo, ConstantCorrectionKl) {
  VariationalModel m = cir_model(0.8);
  m.diffusion = Diffusion::constant(1.0);
  m.z0 = 30.0;
  const TimeGrid g(4.0, 100);
  const auto e = estimate_elbo(m, EventSequence({}, 3.0), 3.0, g, 100, 2);
  // The integrand is deterministic: the KL is exact on every path.
  EXPECT_NEAR(e.kl_term, 0.5 * 0.64 * 3.0, 1e-12);
  EXPECT_NEAR(e.value, e.likelihood_term - e.kl_term, 1e-9);
  EXPECT_GE(e.kl_term, -3 * e.kl_std_error);
}

TEST(Elbo, DeterministicAndCommonRandomNumbers) {
  const auto m = cir_model(0.3);
  const TimeGrid g(4.0, 100);
  const EventSequence ev({0.5, 1.5, 2.0}, 4.0);
  const auto a = estimate_elbo(m, ev, 4.0, g, 16, 5), b = estimate_elbo(m, ev, 4.0, g, 16, 5);
  EXPECT_EQ(a.value, b.value);
  const auto gr = estimate_gradients(m, ev, 4.0, g, 16, 5);
  EXPECT_NEAR(gr.elbo.value, a.value, 1e-9 * std::abs(a.value));
  EXPECT_EQ(estimate_gradients(m, ev, 4.0, g, 16, 5).theta, gr.theta);
}

// b = theta, sigma = 1, u = 0, no events: d ELBO / d theta = -int_0^T' t dt.
TEST(Elbo, ConstantDriftGradient) {
  VariationalModel m;
  m.drift = nn::PriorDrift::affine({0.5, 0.0, 0.0});
  m.encoder = constant_encoder(0.0);
  m.diffusion = Diffusion::constant(1.0);
  m.z0 = 50.0;
  const double T = 2.0;
  const TimeGrid g(T, 200);
  const auto gr = estimate_gradients(m, EventSequence({}, T), T, g, 50, 3);
  double riemann = 0.0;
  for (std::size_t j = 0; j < g.steps(); ++j) riemann += g.node(j) * g.dt();
  EXPECT_NEAR(gr.theta[0], -riemann, 1e-10);
  EXPECT_NEAR(gr.theta[0], -T * T / 2, T * g.dt());
}

TEST(Elbo, PsiGradientVanishesWhenPoolIgnored) {
  VariationalModel m;
  m.drift = nn::PriorDrift::neural(nn::Mlp::xavier({2, 6, 1}, 1), 0.1, 5.0);
  auto enc = nn::DeepSetsEncoder::xavier({3, 6, 3}, {5, 6, 1}, 2, {}, 0.5);
  nn::Mlp rho = enc.rho();
  // rho ignores the pooled channels (inputs 2..4).
  for (std::size_t h = 0; h < 6; ++h) {
    for (std::size_t i = 2; i < 5; ++i) rho.weights(0)[h * 5 + i] = 0.0;
  }
  m.encoder = nn::DeepSetsEncoder(enc.psi(), rho, enc.scales());
  m.z0 = 5.0;
  const TimeGrid g(1.0, 20);
  const auto gr = estimate_gradients(m, EventSequence({}, 1.0), 1.0, g, 4, 1);
  for (std::size_t k = 0; k < m.encoder.psi().param_count(); ++k) EXPECT_EQ(gr.beta[k], 0.0);
  bool any = false;
  for (std::size_t k = m.encoder.psi().param_count(); k < gr.beta.size(); ++k) any |= gr.beta[k] != 0.0;
  EXPECT_TRUE(any);
}

TEST(Elbo, FusedAndGenericPathsAgree) {
  VariationalModel m;
  m.drift = nn::PriorDrift::neural(nn::Mlp::xavier({2, 6, 1}, 4), 0.1, 5.0);
  m.encoder = nn::DeepSetsEncoder::xavier({3, 6, 3}, {5, 6, 1}, 5, {0.1, 1.0, 0.5}, 0.5);
  m.z0 = 5.0;
  const TimeGrid g(2.0, 40);
  const EventSequence ev({0.3, 0.8, 1.1, 1.9}, 2.0);
  const auto noise = sample_brownian(g, 8);
  std::vector<double> ta(m.drift.param_count()), ba(m.encoder.param_count());
  auto tb = ta, bb = ba;
  PathwiseSimulator fused(m, ev, 2.0, g, true), generic(m, ev, 2.0, g, false);
  const auto a = fused.run(noise.increments, ta, ba);
  const auto b = generic.run(noise.increments, tb, bb);
  EXPECT_NEAR(a.loglik, b.loglik, 1e-10);
  EXPECT_NEAR(a.kl, b.kl, 1e-10);
  for (std::size_t k = 0; k < ta.size(); ++k) EXPECT_NEAR(ta[k], tb[k], 1e-9 * (1 + std::abs(tb[k])));
  for (std::size_t k = 0; k < ba.size(); ++k) EXPECT_NEAR(ba[k], bb[k], 1e-9 * (1 + std::abs(bb[k])));
}

TEST(Elbo, HorizonChecks) {
  const auto m = cir_model(0.0);
  const TimeGrid g(1.0, 10);
  try {
    estimate_elbo(m, EventSequence({}, 2.0), 2.0, g, 2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HorizonExceedsGrid);
  }
  try {
    estimate_elbo(m, EventSequence({0.9}, 1.0), 0.5, g, 2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EventBeyondHorizon);
  }
  EXPECT_THROW(estimate_elbo(m, EventSequence({}, 1.0), 1.0, g, 0, 1), Error);
}

// ---------------------------------------------------------------------------
// Training.

std::vector<EventSequence> cir_dataset(std::size_t n, std::uint64_t seed) {
  const TimeGrid g(4.0, 100);
  const auto spec = SdeSpec::cir(0.3, 80.0, 1.0, 5.0);
  std::vector<EventSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(
        sample_cox(euler_maruyama(spec, sample_brownian(g, derive_seed(seed, {i, 0}))), derive_seed(seed, {i, 1})));
  }
  return out;
}

ModelConfig small_config() {
  ModelConfig c;
  c.drift_sizes = {2, 16, 1};
  c.psi_sizes = {3, 16, 8};
  c.rho_sizes = {10, 16, 1};
  return c;
}

TEST(Train, ZeroEpochsLeavesModel) {
  const auto data = cir_dataset(8, 1);
  const auto model = make_model(small_config(), data_scale(data), 3);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto st = train(model, data, cfg);
  EXPECT_EQ(st.model, model);
  EXPECT_TRUE(st.history.empty());
  EXPECT_EQ(st.updates, 0u);
}

TEST(Train, DeterministicAndResumable) {
  const auto data = cir_dataset(12, 2);
  const auto model = make_model(small_config(), data_scale(data), 4);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 5;
  cfg.mc_paths = 3;
  cfg.random_horizon = true;
  const auto a = train(model, data, cfg), b = train(model, data, cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.updates, 9u);  // ceil(12 / 5) per epoch
  ASSERT_EQ(a.history.size(), 3u);

  // Two epochs, then resume to three.
  TrainConfig two = cfg;
  two.epochs = 2;
  TrainState st = train(model, data, two);
  train(st, data, cfg);
  EXPECT_EQ(st, a);

  std::ostringstream os;
  write_history_csv(os, a.history);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "epoch,elbo_mean,elbo_se,grad_norm_theta,grad_norm_beta,skipped_batches");
}

TEST(Train, EmptySequencesPushIntensityDown) {
  std::vector<EventSequence> data(16, EventSequence({}, 4.0));
  auto model = make_model(small_config(), data_scale(data), 5);
  const TimeGrid g(4.0, 100);
  auto terminal_mean = [&](const VariationalModel& m) {
    const auto ens = sample_prior(m.prior_spec(), g, 256, 9);
    double s = 0.0;
    for (std::size_t i = 0; i < ens.n; ++i) s += ens.path(i).back();
    return s / ens.n;
  };
  const double before = terminal_mean(model);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 8;
  cfg.mc_paths = 4;
  cfg.lr_theta = 0.02;
  const auto st = train(model, data, cfg);
  EXPECT_LT(terminal_mean(st.model), before);
  EXPECT_GT(st.history.back().elbo_mean, st.history.front().elbo_mean);
}

// ---------------------------------------------------------------------------
// Amortized sampling.

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  double d = 0.0;
  for (double x : all) {
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / a.size();
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

TEST(Amortized, ZeroedEncoderMatchesPrior) {
  const auto m = cir_model(0.0);
  const TimeGrid g(4.0, 100);
  const EventSequence ev({0.5, 1.0, 1.2, 3.0}, 4.0);
  const std::size_t n = 2000;
  const auto q = sample_amortized_posterior(m, ev, 4.0, g, n, 1);
  const auto p = sample_prior(m.prior_spec(), g, n, 2);
  EXPECT_EQ(q.source, EnsembleSource::Amortized);
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = q.path(i).back();
    b[i] = p.path(i).back();
  }
  EXPECT_LT(ks_statistic(a, b), 1.628 * std::sqrt(2.0 / n));
  // Same seed: pathwise equal to the prior.
  const auto p1 = sample_prior(m.prior_spec(), g, 50, 1);
  const auto q1 = sample_amortized_posterior(m, ev, 4.0, g, 50, 1);
  for (std::size_t k = 0; k < q1.values.size(); ++k) EXPECT_NEAR(q1.values[k], p1.values[k], 1e-9 * (1 + p1.values[k]));
}

TEST(Amortized, PriorDynamicsAfterHorizon) {
  VariationalModel m = cir_model(1.5);
  const TimeGrid g(4.0, 100);
  const EventSequence ev({0.5, 1.0}, 2.0);
  const auto q = sample_amortized_posterior(m, ev, 2.0, g, 4, 6);
  EXPECT_EQ(q, sample_amortized_posterior(m, ev, 2.0, g, 4, 6));
  const auto spec = m.prior_spec();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto noise = sample_brownian(g, derive_seed(6, {i}));
    const auto path = q.path(i);
    for (std::size_t j = 0; j < g.steps(); ++j) {
      const double z = path[j], t = g.node(j);
      const double prior_step = std::max(kPositivityFloor, z + spec.drift(z, t) * g.dt() + std::sqrt(z) * noise.increments[j]);
      if (t >= 2.0 - 1e-12) {
        EXPECT_NEAR(path[j + 1], prior_step, 1e-9 * (1 + z));
      } else {
        // Before the horizon u = sigma * 1.5, so the drift gains sigma^2 * 1.5 = 1.5 z.
        EXPECT_NEAR(path[j + 1], std::max(kPositivityFloor, prior_step + z * 1.5 * g.dt()), 1e-9 * (1 + z));
      }
    }
  }
}

TEST(Ensemble, PredictiveLogLikelihoodExamples) {
  const TimeGrid g(1.0, 10);
  PathEnsemble e{g, 3, std::vector<double>(3 * g.size(), 2.0), EnsembleSource::Prior};
  EXPECT_NEAR(posterior_predictive_ll(e, EventSequence({0.5}, 1.0), 0.0, 1.0), std::log(2.0) - 2.0, 1e-12);
  EXPECT_NEAR(posterior_predictive_ll(e, EventSequence({0.2}, 1.0), 0.4, 1.0), -2.0 * 0.6, 1e-12);
  PathEnsemble empty{g, 0, {}, EnsembleSource::Prior};
  try {
    posterior_predictive_ll(empty, EventSequence({}, 1.0), 0.0, 1.0);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::EmptyEnsemble);
  }
}

TEST(Ensemble, SummaryAndCsv) {
  const TimeGrid g(1.0, 2);
  PathEnsemble e{g, 2, {1.0, 2.0, 3.0, 3.0, 4.0, 5.0}, EnsembleSource::Mcmc};
  const auto s = summarize(e);
  EXPECT_EQ(s.mean, (std::vector<double>{2.0, 3.0, 4.0}));
  EXPECT_NEAR(s.std[0], std::sqrt(2.0), 1e-12);  // unbiased
  std::ostringstream os;
  write_ensemble_csv(os, e);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,path0,path1");
  std::ostringstream ss;
  write_summary_csv(ss, s);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "t,mean,std,q05,q95");
}

}  // namespace
}  // namespace coxsde
