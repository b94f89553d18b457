#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "coxsde/events.hpp"
#include "coxsde/time_grid.hpp"

namespace coxsde {

/// Lower bound applied to intensity states after every Euler step.
inline constexpr double kPositivityFloor = 1e-6;

/// No clamping (signed processes such as the Brownian bridge).
inline constexpr double kNoFloor = -std::numeric_limits<double>::infinity();

struct BrownianPath {
  TimeGrid grid;
  std::vector<double> increments;  // increments[j] covers [t_j, t_{j+1})
  std::uint64_t seed = 0;
};

BrownianPath sample_brownian(const TimeGrid& grid, std::uint64_t seed);

/// Fills `out` with independent N(0, dt) increments drawn from `seed`.
void fill_brownian(std::uint64_t seed, double dt, std::span<double> out);

/// Diffusion coefficient sigma(z, t): either a constant or scale * sqrt(z).
struct Diffusion {
  enum class Kind { Constant, SqrtState };

  Kind kind = Kind::Constant;
  double scale = 1.0;

  static Diffusion constant(double value) { return {Kind::Constant, value}; }
  static Diffusion sqrt_state(double scale = 1.0) { return {Kind::SqrtState, scale}; }

  double value(double z) const noexcept;

  /// d sigma / dz; the square-root derivative is floored at kPositivityFloor.
  double dz(double z) const noexcept;

  bool operator==(const Diffusion&) const = default;
};

/// Drift a + b z + c t. Lets ensemble simulators use vectorized kernels.
struct AffineDrift {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double operator()(double z, double t) const noexcept { return a + b * z + c * t; }
};

using ScalarField = std::function<double(double z, double t)>;

/// Law of a scalar intensity diffusion dZ = b(Z, t) dt + sigma(Z) dB.
struct SdeSpec {
  ScalarField drift;
  Diffusion diffusion;
  double z0 = 0.0;
  double floor = kPositivityFloor;
  std::optional<AffineDrift> affine;  // set when `drift` is affine

  static SdeSpec from_affine(AffineDrift drift, Diffusion diffusion, double z0);

  /// dZ = kappa (mean - Z) dt + scale sqrt(Z) dB.
  static SdeSpec cir(double kappa, double mean, double scale, double z0);
};

/// Sample path on a grid.
struct Trajectory {
  TimeGrid grid;
  std::vector<double> values;

  /// Linear interpolation between grid nodes.
  double at(double t) const noexcept;
};

/// sum_j z_j |[t_j, t_{j+1}) cap [a, b)|: left-endpoint Riemann integral.
double riemann_left(const TimeGrid& grid, std::span<const double> values, double a, double b);

/// Euler-Maruyama with positivity clamp at spec.floor.
Trajectory euler_maruyama(const SdeSpec& spec, const BrownianPath& noise);

/// Same scheme writing the M + 1 node values of `grid` into `out`.
void euler_path(const SdeSpec& spec, const TimeGrid& grid, std::span<const double> increments, std::span<double> out);

/// u(z, t, horizon, events) in Brownian units; the drift gains sigma * u.
using DriftCorrection = std::function<double(double z, double t, double horizon, const EventSequence& events)>;

/// Euler-Maruyama of dZ = [b + 1{t < T'} sigma u] dt + sigma dB. The indicator
/// is evaluated at the left endpoint of each step.
Trajectory simulate_posterior(const SdeSpec& prior, const DriftCorrection& correction, const EventSequence& events,
                              double horizon, const BrownianPath& noise);

/// Simulates n paths of an affine-drift SDE on a shared grid using common
/// per-path seeds derive_seed(seed, {i}). Returns node values path-major
/// (n x (M + 1)). Falls back to the generic stepper when `spec.affine` is
/// unset.
std::vector<double> simulate_ensemble(const SdeSpec& spec, const TimeGrid& grid, std::size_t n, std::uint64_t seed);

}  // namespace coxsde
