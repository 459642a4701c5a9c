#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "sharpbounds/inference.hpp"

namespace sharpbounds {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw Error(ErrorCode::kDomain, "quantile of an empty sample");
  if (!(level >= 0.0 && level <= 1.0)) throw Error(ErrorCode::kDomain, "level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const auto b = static_cast<double>(values.size());
  // The small slack keeps exact products such as 0.025 * 1000 on their integer.
  auto k = static_cast<std::size_t>(std::ceil(level * b - 1e-9));
  k = std::clamp<std::size_t>(k, 1, values.size());
  return values[k - 1];
}

double empirical_median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kDomain, "median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size();
  if (m % 2 == 1) return values[m / 2];
  const double a = values[m / 2 - 1];
  const double b = values[m / 2];
  if (a == b) return a;
  return 0.5 * (a + b);
}

std::vector<Index> resample_rows(Index n, std::uint64_t seed, int b) {
  std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(b)));
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::vector<Index> rows(static_cast<size_t>(n));
  for (Index& r : rows) r = pick(rng);
  return rows;
}

DrawMatrix bootstrap_draws(Index n, const DrawStatistic& statistic, const BootstrapOptions& options) {
  if (options.draws < 2) throw Error(ErrorCode::kConfig, "at least two bootstrap draws needed");
  if (n < 1) throw Error(ErrorCode::kDomain, "cannot resample an empty sample");
  const int draws = options.draws;
  std::vector<VectorXd> results(static_cast<size_t>(draws));
  std::vector<char> failed(static_cast<size_t>(draws), 0);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int b = next++; b < draws; b = next++) {
      const std::vector<Index> rows = resample_rows(n, options.seed, b);
      try {
        results[static_cast<size_t>(b)] = statistic(rows);
      } catch (const Error&) {
        failed[static_cast<size_t>(b)] = 1;
      }
    }
  };
  const int threads = std::clamp(options.threads, 1, draws);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  DrawMatrix out;
  out.failed = std::move(failed);
  Index width = 0;
  for (int b = 0; b < draws; ++b) {
    if (out.failed[static_cast<size_t>(b)]) {
      ++out.n_failed;
    } else {
      width = results[static_cast<size_t>(b)].size();
    }
  }
  if (out.n_failed > options.max_failed_share * draws) {
    throw Error(ErrorCode::kBootstrapUnstable,
                std::to_string(out.n_failed) + " of " + std::to_string(draws) +
                    " bootstrap draws failed");
  }
  out.values = MatrixXd::Constant(draws, width, std::numeric_limits<double>::quiet_NaN());
  for (int b = 0; b < draws; ++b) {
    if (!out.failed[static_cast<size_t>(b)]) out.values.row(b) = results[static_cast<size_t>(b)];
  }
  return out;
}

BootstrapResult summarize_draws(const DrawMatrix& draws, Index lower_col, Index upper_col) {
  BootstrapResult out;
  out.n_failed = draws.n_failed;
  std::vector<double> lower, upper;
  for (Index b = 0; b < draws.values.rows(); ++b) {
    if (draws.failed[static_cast<size_t>(b)]) continue;
    const double lo = draws.values(b, lower_col);
    const double hi = draws.values(b, upper_col);
    out.draws.emplace_back(lo, hi);
    lower.push_back(lo);
    upper.push_back(hi);
    if (!std::isfinite(lo) || !std::isfinite(hi)) ++out.n_infinite;
  }
  if (lower.empty()) throw Error(ErrorCode::kBootstrapUnstable, "every bootstrap draw failed");
  out.set_ci = {empirical_quantile(lower, 0.025), empirical_quantile(upper, 0.975)};
  out.lb_ci = {empirical_quantile(lower, 0.025), empirical_quantile(lower, 0.975)};
  out.ub_ci = {empirical_quantile(upper, 0.025), empirical_quantile(upper, 0.975)};
  out.lb_one_sided = empirical_quantile(lower, 0.05);
  out.ub_one_sided = empirical_quantile(upper, 0.95);
  return out;
}

BootstrapResult percentile_bootstrap(
    Index n, const std::function<Interval(std::span<const Index> rows)>& estimator,
    const BootstrapOptions& options) {
  const DrawStatistic statistic = [&estimator](std::span<const Index> rows) {
    const Interval est = estimator(rows);
    VectorXd v(2);
    v << est.first, est.second;
    return v;
  };
  return summarize_draws(bootstrap_draws(n, statistic, options), 0, 1);
}

DrawStatistic ipw_bootstrap_statistic(const IPWBootstrapSpec& spec) {
  if (spec.sample == nullptr) throw Error(ErrorCode::kDomain, "bootstrap needs a sample");
  return [spec](std::span<const Index> rows) {
    const IPWSample draw = spec.sample->subset(rows);
    const IPWEstimand estimand = spec.nuisance.estimand;
    VectorXd e_hat;
    GridPredictions grid;
    const std::vector<Index> cells = ipw_cells(draw.z);
    if (spec.full_refit) {
      const IPWNuisance refit = fit_ipw_nuisance(draw, estimand);
      e_hat = refit.propensity.predict(draw.x);
      grid = refit.grid.predict_sorted(ipw_quantile_features(draw.x, draw.z, e_hat), cells);
    } else {
      e_hat = one_step_update(spec.nuisance.propensity, draw.x, draw.z).predict(draw.x);
      grid = spec.nuisance.grid.predict_sorted(ipw_quantile_features(draw.x, draw.z, e_hat), cells);
    }
    VectorXd out(2 * static_cast<Index>(spec.configs.size()));
    for (size_t k = 0; k < spec.configs.size(); ++k) {
      const BoundPair b = ipw_bounds(draw, e_hat, grid, spec.configs[k], estimand);
      out(static_cast<Index>(2 * k)) = b.lower.value;
      out(static_cast<Index>(2 * k + 1)) = b.upper.value;
    }
    return out;
  };
}

}  // namespace sharpbounds
