#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "coxsde/elbo.hpp"
#include "coxsde/pathwise.hpp"
#include "coxsde/random.hpp"

namespace coxsde {
namespace {

VariationalModel tiny_model(std::uint64_t seed) {
  VariationalModel m;
  m.drift = nn::PriorDrift::neural(nn::Mlp::xavier({2, 8, 1}, seed), 0.2, 3.0);
  nn::EncoderScales es{0.2, 1.0, 0.5};
  m.encoder = nn::DeepSetsEncoder::xavier({3, 8, 4}, {6, 8, 1}, seed + 1, es, 0.5);
  m.diffusion = Diffusion::sqrt_state(1.0);
  m.z0 = 5.0;
  return m;
}

double elbo_of(const VariationalModel& m, const EventSequence& ev, double h, const TimeGrid& g) {
  return estimate_elbo(m, ev, h, g, 3, 99).value;
}

TEST(Pathwise, GradientsMatchFrozenNoiseFiniteDifferences) {
  const TimeGrid grid(0.5, 20);
  const EventSequence ev({0.07, 0.21, 0.33, 0.41}, 0.5);
  for (std::uint64_t s = 1; s <= 3; ++s) {
    VariationalModel m = tiny_model(s);
    const auto g = estimate_gradients(m, ev, 0.5, grid, 3, 99);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t k = 0; k < m.drift.param_count(); ++k) {
      VariationalModel mp = m, mm = m;
      mp.drift.params()[k] += h;
      mm.drift.params()[k] -= h;
      const double fd = (elbo_of(mp, ev, 0.5, grid) - elbo_of(mm, ev, 0.5, grid)) / (2 * h);
      worst = std::max(worst, std::abs(g.theta[k] - fd) / (std::abs(fd) + 1e-8));
    }
    const auto beta = m.encoder.params();
    for (std::size_t k = 0; k < beta.size(); ++k) {
      VariationalModel mp = m, mm = m;
      auto bp = beta, bm = beta;
      bp[k] += h;
      bm[k] -= h;
      mp.encoder.set_params(bp);
      mm.encoder.set_params(bm);
      const double fd = (elbo_of(mp, ev, 0.5, grid) - elbo_of(mm, ev, 0.5, grid)) / (2 * h);
      const double err = std::abs(g.beta[k] - fd) / (std::abs(fd) + 1e-8);
      worst = std::max(worst, err);
      EXPECT_LT(err, 1e-3) << "beta " << k << " g=" << g.beta[k] << " fd=" << fd;
    }
    EXPECT_LT(worst, 1e-3);
  }
}

}  // namespace
}  // namespace coxsde
