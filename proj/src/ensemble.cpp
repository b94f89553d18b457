#include "coxsde/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "coxsde/cox.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/parallel.hpp"
#include "coxsde/pathwise.hpp"
#include "coxsde/random.hpp"

namespace coxsde {

std::string_view source_name(EnsembleSource s) {
  switch (s) {
    case EnsembleSource::Amortized:
      return "amortized";
    case EnsembleSource::Mcmc:
      return "mcmc";
    case EnsembleSource::Prior:
      return "prior";
  }
  return "unknown";
}

Trajectory PathEnsemble::trajectory(std::size_t i) const {
  const auto p = path(i);
  return Trajectory{grid, std::vector<double>(p.begin(), p.end())};
}

PathEnsemble sample_amortized_posterior(const VariationalModel& model, const EventSequence& events, double horizon,
                                        const TimeGrid& grid, std::size_t n, std::uint64_t seed) {
  PathEnsemble out{grid, n, std::vector<double>(n * grid.size()), EnsembleSource::Amortized};
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(n, 1));
  const std::size_t chunk = (n + workers - 1) / std::max<std::size_t>(workers, 1);
  parallel_for(workers, [&](std::size_t w) {
    PathwiseSimulator sim(model, events, horizon, grid);
    std::vector<double> noise(grid.steps());
    std::vector<double> path;
    for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) {
      fill_brownian(derive_seed(seed, {i}), grid.dt(), noise);
      sim.run(noise, {}, {}, 1.0, &path);
      std::copy(path.begin(), path.end(), out.path(i).begin());
    }
  });
  return out;
}

PathEnsemble sample_prior(const SdeSpec& spec, const TimeGrid& grid, std::size_t n, std::uint64_t seed) {
  return PathEnsemble{grid, n, simulate_ensemble(spec, grid, n, seed), EnsembleSource::Prior};
}

double posterior_predictive_ll(const PathEnsemble& ensemble, const EventSequence& events, double from, double to) {
  if (ensemble.n == 0) fail(ErrorCode::EmptyEnsemble, "predictive likelihood of an empty ensemble");
  if (to > ensemble.grid.t_end() * (1.0 + 1e-12)) fail(ErrorCode::HorizonExceedsGrid, "window beyond the grid");
  double s = 0.0;
  for (std::size_t i = 0; i < ensemble.n; ++i) {
    s += poisson_loglik(ensemble.grid, ensemble.path(i), events.times(), from, to);
  }
  return s / static_cast<double>(ensemble.n);
}

EnsembleSummary summarize(const PathEnsemble& ensemble) {
  EnsembleSummary s;
  const std::size_t nodes = ensemble.grid.size();
  std::vector<double> col(ensemble.n);
  auto quantile = [&](double p) {
    // Linear interpolation between order statistics.
    const double pos = p * static_cast<double>(col.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, col.size() - 1);
    return col[lo] + (pos - static_cast<double>(lo)) * (col[hi] - col[lo]);
  };
  for (std::size_t j = 0; j < nodes; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < ensemble.n; ++i) {
      col[i] = ensemble.values[i * nodes + j];
      sum += col[i];
    }
    const double n = static_cast<double>(ensemble.n);
    const double mean = n > 0 ? sum / n : 0.0;
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    s.t.push_back(ensemble.grid.node(j));
    s.mean.push_back(mean);
    s.std.push_back(ensemble.n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0);
    std::sort(col.begin(), col.end());
    s.q05.push_back(col.empty() ? 0.0 : quantile(0.05));
    s.q95.push_back(col.empty() ? 0.0 : quantile(0.95));
  }
  return s;
}

void write_ensemble_csv(std::ostream& os, const PathEnsemble& ensemble) {
  os << "t";
  for (std::size_t i = 0; i < ensemble.n; ++i) os << ",path" << i;
  os << '\n' << std::setprecision(17);
  const std::size_t nodes = ensemble.grid.size();
  for (std::size_t j = 0; j < nodes; ++j) {
    os << ensemble.grid.node(j);
    for (std::size_t i = 0; i < ensemble.n; ++i) os << ',' << ensemble.values[i * nodes + j];
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const EnsembleSummary& s) {
  os << "t,mean,std,q05,q95\n" << std::setprecision(17);
  for (std::size_t j = 0; j < s.t.size(); ++j) {
    os << s.t[j] << ',' << s.mean[j] << ',' << s.std[j] << ',' << s.q05[j] << ',' << s.q95[j] << '\n';
  }
}

}  // namespace coxsde
