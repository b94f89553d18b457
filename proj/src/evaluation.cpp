#include "coxsde/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "coxsde/cox.hpp"
#include "coxsde/errors.hpp"
#include "coxsde/parallel.hpp"
#include "coxsde/random.hpp"
#include "coxsde/simd/kernels.hpp"

namespace coxsde {

double path_l2_distance(const TimeGrid& grid, std::span<const double> a, std::span<const double> b) {
  if (a.size() != grid.size() || b.size() != grid.size()) fail(ErrorCode::GridMismatch, "paths do not match the grid");
  return std::sqrt(grid.dt() * simd::kernels().squared_distance(a.data(), b.data(), grid.steps()));
}

double path_l2_distance(const Trajectory& a, const Trajectory& b) {
  if (!(a.grid == b.grid)) fail(ErrorCode::GridMismatch, "paths live on different grids");
  return path_l2_distance(a.grid, a.values, b.values);
}

AssignmentResult hungarian(std::span<const double> cost, std::size_t n) {
  if (cost.size() != n * n) fail(ErrorCode::SizeMismatch, "cost matrix is not square");
  AssignmentResult out;
  if (n == 0) return out;
  // Shortest augmenting paths with row/column potentials (1-based, column 0
  // is a virtual source).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.permutation.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) out.permutation[match[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) out.cost += cost[i * n + out.permutation[i]];
  return out;
}

AssignmentResult wasserstein2(const PathEnsemble& mu, const PathEnsemble& nu) {
  if (mu.n != nu.n) fail(ErrorCode::SizeMismatch, "ensembles differ in size");
  if (!(mu.grid == nu.grid)) fail(ErrorCode::GridMismatch, "ensembles live on different grids");
  const std::size_t n = mu.n;
  if (n == 0) fail(ErrorCode::EmptyEnsemble, "Wasserstein distance of empty ensembles");
  std::vector<double> cost(n * n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = path_l2_distance(mu.grid, mu.path(i), nu.path(j));
      cost[i * n + j] = d * d;
    }
  });
  AssignmentResult r = hungarian(cost, n);
  r.cost = std::sqrt(std::max(0.0, r.cost) / static_cast<double>(n));
  return r;
}

double prior_l2_deviation(const SdeSpec& learned, const SdeSpec& truth, const TimeGrid& grid, std::size_t n_paths,
                          std::uint64_t seed) {
  if (n_paths == 0) fail(ErrorCode::EmptyEnsemble, "no paths requested");
  std::vector<double> a(grid.size()), b(grid.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    const BrownianPath noise = sample_brownian(grid, derive_seed(seed, {i}));
    euler_path(learned, grid, noise.increments, a);
    euler_path(truth, grid, noise.increments, b);
    total += grid.dt() * simd::kernels().squared_distance(a.data(), b.data(), grid.steps());
  }
  return total / static_cast<double>(n_paths);
}

// ---------------------------------------------------------------------------

double GapRow::gap_se() const { return std::sqrt(train_se * train_se + test_se * test_se); }

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(std::span<const double> x) {
  MeanSe r;
  if (x.empty()) return r;
  const double n = static_cast<double>(x.size());
  for (double v : x) r.mean += v;
  r.mean /= n;
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - r.mean) * (v - r.mean);
    r.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return r;
}

std::vector<EventSequence> simulate_dataset(const SdeSpec& truth, const TimeGrid& grid, std::size_t n,
                                            std::uint64_t seed) {
  std::vector<EventSequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Trajectory z = euler_maruyama(truth, sample_brownian(grid, derive_seed(seed, {i, 0})));
    out.push_back(sample_cox(z, derive_seed(seed, {i, 1})));
  }
  return out;
}

}  // namespace

std::vector<GapRow> amortization_gap_study(std::span<const std::size_t> train_sizes, const GapProtocol& p) {
  if (train_sizes.empty()) return {};
  const TimeGrid grid(p.horizon, p.steps);
  const std::size_t max_n = *std::max_element(train_sizes.begin(), train_sizes.end());
  const auto pool = simulate_dataset(p.truth, grid, max_n, derive_seed(p.seed, {1}));
  const auto test = simulate_dataset(p.truth, grid, p.test_size, derive_seed(p.seed, {2}));

  auto oracle = [&](const EventSequence& ev, std::uint64_t s) {
    MhConfig mh = p.mcmc;
    mh.seed = s;
    MhResult r = mh_posterior_sampler(p.truth, ev, p.horizon, grid, mh);
    if (r.ensemble.n < p.ensemble) fail(ErrorCode::InvalidArgument, "oracle chain keeps fewer states than the ensemble size");
    r.ensemble.values.resize(p.ensemble * grid.size());
    r.ensemble.n = p.ensemble;
    return r.ensemble;
  };
  const std::size_t n_train_eval = std::min(p.eval_train, max_n);
  std::vector<PathEnsemble> pool_oracle(n_train_eval), test_oracle(p.test_size);
  parallel_for(n_train_eval, [&](std::size_t i) { pool_oracle[i] = oracle(pool[i], derive_seed(p.seed, {3, i})); });
  parallel_for(p.test_size, [&](std::size_t i) { test_oracle[i] = oracle(test[i], derive_seed(p.seed, {4, i})); });

  std::vector<GapRow> rows;
  for (std::size_t n : train_sizes) {
    const std::span<const EventSequence> data(pool.data(), n);
    ModelConfig mc = p.model;
    mc.z0 = p.truth.z0;
    VariationalModel model = make_model(mc, data_scale(data), derive_seed(p.seed, {5, n}));
    TrainConfig tc = p.train;
    tc.seed = derive_seed(p.seed, {6, n});
    tc.max_updates = p.updates;
    tc.epochs = std::numeric_limits<std::size_t>::max();
    tc.steps = p.steps;
    TrainState st = train(std::move(model), data, tc);

    auto score = [&](const EventSequence& ev, const PathEnsemble& ref, std::uint64_t s) {
      const PathEnsemble q = sample_amortized_posterior(st.model, ev, p.horizon, grid, p.ensemble, s);
      return wasserstein2(q, ref).cost;
    };
    const std::size_t k = std::min(n, n_train_eval);
    std::vector<double> wtr(k), wte(p.test_size);
    for (std::size_t i = 0; i < k; ++i) wtr[i] = score(pool[i], pool_oracle[i], derive_seed(p.seed, {7, n, i}));
    for (std::size_t i = 0; i < p.test_size; ++i) wte[i] = score(test[i], test_oracle[i], derive_seed(p.seed, {8, n, i}));
    const MeanSe a = mean_se(wtr), b = mean_se(wte);
    rows.push_back({n, a.mean, a.se, b.mean, b.se});
  }
  return rows;
}

void write_gap_csv(std::ostream& os, std::span<const GapRow> rows) {
  os << "n,train_wasserstein,train_se,test_wasserstein,test_se,gap,gap_se\n" << std::setprecision(12);
  for (const auto& r : rows) {
    os << r.n << ',' << r.train_w << ',' << r.train_se << ',' << r.test_w << ',' << r.test_se << ',' << r.gap() << ','
       << r.gap_se() << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

std::string horizon_label(double f) {
  if (f <= 0.0) return "[0,T]";
  std::ostringstream os;
  os << '[' << f << "T,T]";
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<TimingRow> timing_harness(const VariationalModel& model, std::span<const EventSequence> test,
                                      std::span<const double> horizon_fractions, const TimingProtocol& p) {
  if (test.empty()) fail(ErrorCode::InvalidArgument, "timing needs test observations");
  const double t_end = test.front().horizon();
  const TimeGrid grid(t_end, p.steps);
  const SdeSpec prior = model.prior_spec();
  const double n_obs = static_cast<double>(test.size());
  std::vector<TimingRow> rows;
  for (double f : horizon_fractions) {
    const double cond = f <= 0.0 ? t_end : f * t_end;
    const double from = f <= 0.0 ? 0.0 : cond;
    std::vector<EventSequence> observed;
    for (const auto& ev : test) observed.push_back(ev.truncated(cond));

    TimingRow vi{horizon_label(f), cond, 0.0, "amortized", 0.0, 0};
    auto t0 = std::chrono::steady_clock::now();
    double ll = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const PathEnsemble e =
          sample_amortized_posterior(model, observed[i], cond, grid, p.paths, derive_seed(p.seed, {1, i}));
      ll += posterior_predictive_ll(e, test[i], from, t_end);
    }
    vi.wall_clock_s = seconds_since(t0);
    vi.predictive_ll = ll / n_obs;
    rows.push_back(vi);

    TimingRow best;
    bool matched = false;
    for (std::size_t budget : p.mcmc_budgets) {
      MhConfig mh = p.mcmc;
      mh.burn_in = budget / 2;
      mh.thin = std::max<std::size_t>(1, (budget - mh.burn_in) / p.paths);
      mh.n_steps = mh.burn_in + mh.thin * p.paths;
      TimingRow row{horizon_label(f), cond, 0.0, "mcmc", 0.0, mh.n_steps};
      t0 = std::chrono::steady_clock::now();
      double mll = 0.0;
      for (std::size_t i = 0; i < test.size(); ++i) {
        mh.seed = derive_seed(p.seed, {2, budget, i});
        const MhResult r = mh_posterior_sampler(prior, observed[i], cond, grid, mh);
        mll += posterior_predictive_ll(r.ensemble, test[i], from, t_end);
      }
      row.wall_clock_s = seconds_since(t0);
      row.predictive_ll = mll / n_obs;
      best = row;
      if (row.predictive_ll >= vi.predictive_ll - p.match_tolerance * std::abs(vi.predictive_ll)) {
        matched = true;
        break;
      }
    }
    if (!matched) best.method = "mcmc_unmatched";
    rows.push_back(best);
  }
  return rows;
}

void write_timing_csv(std::ostream& os, std::span<const TimingRow> rows) {
  os << "horizon,predictive_ll,method,wall_clock_s\n" << std::setprecision(12);
  for (const auto& r : rows) os << r.horizon << ',' << r.predictive_ll << ',' << r.method << ',' << r.wall_clock_s << '\n';
}

void write_deviation_csv(std::ostream& os, std::span<const DeviationRow> rows) {
  os << "drift_name,method,l2_deviation\n" << std::setprecision(12);
  for (const auto& r : rows) os << r.drift_name << ',' << r.method << ',' << r.l2_deviation << '\n';
}

}  // namespace coxsde
