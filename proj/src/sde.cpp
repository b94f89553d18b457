#include "coxsde/sde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "coxsde/errors.hpp"
#include "coxsde/random.hpp"
#include "coxsde/simd/kernels.hpp"

namespace coxsde {
namespace {

void check_finite(double z, std::size_t step) {
  if (!std::isfinite(z)) fail(ErrorCode::NonFiniteState, "state became non-finite at step " + std::to_string(step));
}

}  // namespace

void fill_brownian(std::uint64_t seed, double dt, std::span<double> out) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  for (double& x : out) x = normal(rng);
}

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed) {
  BrownianPath path{grid, std::vector<double>(grid.steps()), seed};
  fill_brownian(seed, grid.dt(), path.increments);
  return path;
}

double Diffusion::value(double z) const noexcept {
  return kind == Kind::Constant ? scale : scale * std::sqrt(std::max(z, 0.0));
}

double Diffusion::dz(double z) const noexcept {
  return kind == Kind::Constant ? 0.0 : scale / (2.0 * std::sqrt(std::max(z, kPositivityFloor)));
}

SdeSpec SdeSpec::from_affine(AffineDrift drift, Diffusion diffusion, double z0) {
  SdeSpec spec;
  spec.drift = drift;
  spec.diffusion = diffusion;
  spec.z0 = z0;
  spec.affine = drift;
  return spec;
}

SdeSpec SdeSpec::cir(double kappa, double mean, double scale, double z0) {
  return from_affine(AffineDrift{kappa * mean, -kappa, 0.0}, Diffusion::sqrt_state(scale), z0);
}

double Trajectory::at(double t) const noexcept {
  const auto loc = grid.locate(t);
  return (1.0 - loc.weight) * values[loc.index] + loc.weight * values[loc.index + 1];
}

double riemann_left(const TimeGrid& grid, std::span<const double> values, double a, double b) {
  if (b <= a) return 0.0;
  double s = 0.0;
  const std::size_t first = grid.locate(a).index;
  for (std::size_t j = first; j < grid.steps() && grid.node(j) < b; ++j) s += values[j] * grid.overlap(j, a, b);
  return s;
}

void euler_path(const SdeSpec& spec, const TimeGrid& grid, std::span<const double> increments, std::span<double> out) {
  const double dt = grid.dt();
  double z = spec.z0;
  out[0] = z;
  if (spec.affine) {
    const AffineDrift& d = *spec.affine;
    for (std::size_t j = 0; j < grid.steps(); ++j) {
      z = z + d(z, grid.node(j)) * dt + spec.diffusion.value(z) * increments[j];
      check_finite(z, j);
      z = std::max(z, spec.floor);
      out[j + 1] = z;
    }
    return;
  }
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    z = z + spec.drift(z, grid.node(j)) * dt + spec.diffusion.value(z) * increments[j];
    check_finite(z, j);
    z = std::max(z, spec.floor);
    out[j + 1] = z;
  }
}

Trajectory euler_maruyama(const SdeSpec& spec, const BrownianPath& noise) {
  Trajectory out{noise.grid, std::vector<double>(noise.grid.size())};
  euler_path(spec, noise.grid, noise.increments, out.values);
  return out;
}

Trajectory simulate_posterior(const SdeSpec& prior, const DriftCorrection& correction, const EventSequence& events,
                              double horizon, const BrownianPath& noise) {
  const TimeGrid& grid = noise.grid;
  if (horizon > grid.t_end() * (1.0 + 1e-12)) {
    fail(ErrorCode::HorizonExceedsGrid, "horizon " + std::to_string(horizon) + " beyond grid end");
  }
  if (!events.empty() && events.times().back() > horizon) {
    fail(ErrorCode::EventBeyondHorizon, "events recorded after the conditioning horizon");
  }
  Trajectory out{grid, std::vector<double>(grid.size())};
  double z = prior.z0;
  out.values[0] = z;
  const double dt = grid.dt();
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    const double t = grid.node(j);
    const double sigma = prior.diffusion.value(z);
    double drift = prior.drift(z, t);
    if (t < horizon && correction) drift += sigma * correction(z, t, horizon, events);
    z = z + drift * dt + sigma * noise.increments[j];
    check_finite(z, j);
    z = std::max(z, prior.floor);
    out.values[j + 1] = z;
  }
  return out;
}

std::vector<double> simulate_ensemble(const SdeSpec& spec, const TimeGrid& grid, std::size_t n, std::uint64_t seed) {
  const std::size_t nodes = grid.size();
  const std::size_t m = grid.steps();
  std::vector<double> out(n * nodes);
  if (!spec.affine) {
    for (std::size_t i = 0; i < n; ++i) {
      const Trajectory tr = euler_maruyama(spec, sample_brownian(grid, derive_seed(seed, {i})));
      std::copy(tr.values.begin(), tr.values.end(), out.begin() + static_cast<std::ptrdiff_t>(i * nodes));
    }
    return out;
  }
  constexpr std::size_t kBlock = 256;
  const auto& k = simd::kernels();
  std::vector<double> noise(kBlock * m);
  std::vector<double> z(kBlock);
  std::vector<double> dw(kBlock);
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t b = std::min(kBlock, n - start);
    for (std::size_t i = 0; i < b; ++i) {
      fill_brownian(derive_seed(seed, {start + i}), grid.dt(), std::span(noise.data() + i * m, m));
    }
    std::fill(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(b), spec.z0);
    for (std::size_t i = 0; i < b; ++i) out[(start + i) * nodes] = spec.z0;
    simd::AffineStepArgs args;
    args.z = z.data();
    args.n = b;
    args.a = spec.affine->a;
    args.b = spec.affine->b;
    args.c = spec.affine->c;
    args.dt = grid.dt();
    args.scale = spec.diffusion.scale;
    args.sqrt_diffusion = spec.diffusion.kind == Diffusion::Kind::SqrtState;
    args.floor = spec.floor;
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < b; ++i) dw[i] = noise[i * m + j];
      args.dw = dw.data();
      args.t = grid.node(j);
      k.affine_step(args);
      for (std::size_t i = 0; i < b; ++i) {
        check_finite(z[i], j);
        out[(start + i) * nodes + j + 1] = z[i];
      }
    }
  }
  return out;
}

}  // namespace coxsde
