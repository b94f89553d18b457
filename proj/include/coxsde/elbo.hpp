#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "coxsde/events.hpp"
#include "coxsde/model.hpp"
#include "coxsde/time_grid.hpp"

namespace coxsde {

struct ElboEstimate {
  double value = 0.0;
  double likelihood_term = 0.0;
  double kl_term = 0.0;
  double mc_std_error = 0.0;  // of value
  double likelihood_std_error = 0.0;
  double kl_std_error = 0.0;
  std::size_t paths = 0;
};

struct ElboGradients {
  ElboEstimate elbo;
  std::vector<double> theta;
  std::vector<double> beta;
};

/// Monte Carlo average over m posterior paths of
/// sum log Z(tau_i) - int_0^T' Z dt - 1/2 int_0^T' u^2 dt.
/// Path i is driven by the increments of seed derive_seed(seed, {i}).
ElboEstimate estimate_elbo(const VariationalModel& model, const EventSequence& events, double horizon,
                           const TimeGrid& grid, std::size_t m, std::uint64_t seed);

/// Same estimate plus its pathwise gradient with respect to the drift and
/// encoder parameters, on the same paths.
ElboGradients estimate_gradients(const VariationalModel& model, const EventSequence& events, double horizon,
                                 const TimeGrid& grid, std::size_t m, std::uint64_t seed);

}  // namespace coxsde
