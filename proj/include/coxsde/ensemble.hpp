#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "coxsde/events.hpp"
#include "coxsde/model.hpp"
#include "coxsde/sde.hpp"

namespace coxsde {

enum class EnsembleSource { Amortized, Mcmc, Prior };

std::string_view source_name(EnsembleSource s);

/// n paths on a shared grid, stored path-major (n x (M + 1)).
struct PathEnsemble {
  TimeGrid grid;
  std::size_t n = 0;
  std::vector<double> values;
  EnsembleSource source = EnsembleSource::Prior;

  std::span<const double> path(std::size_t i) const {
    return std::span(values).subspan(i * grid.size(), grid.size());
  }
  std::span<double> path(std::size_t i) { return std::span(values).subspan(i * grid.size(), grid.size()); }
  Trajectory trajectory(std::size_t i) const;

  bool operator==(const PathEnsemble&) const = default;
};

/// n draws of the learned posterior SDE on [0, T], correction active on
/// [0, T'). Path i uses the increments of derive_seed(seed, {i}).
PathEnsemble sample_amortized_posterior(const VariationalModel& model, const EventSequence& events, double horizon,
                                        const TimeGrid& grid, std::size_t n, std::uint64_t seed);

/// n prior draws with the same seeding convention.
PathEnsemble sample_prior(const SdeSpec& spec, const TimeGrid& grid, std::size_t n, std::uint64_t seed);

/// Mean over paths of sum_{from < tau <= to} log Z(tau) - int_from^to Z dt.
double posterior_predictive_ll(const PathEnsemble& ensemble, const EventSequence& events, double from, double to);

struct EnsembleSummary {
  std::vector<double> t, mean, std, q05, q95;
};

EnsembleSummary summarize(const PathEnsemble& ensemble);

/// Rows are grid nodes, columns are paths; first column is t.
void write_ensemble_csv(std::ostream& os, const PathEnsemble& ensemble);
void write_summary_csv(std::ostream& os, const EnsembleSummary& summary);

}  // namespace coxsde
