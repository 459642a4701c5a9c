#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "sharpbounds/simlab.hpp"

namespace sharpbounds {

namespace {

constexpr std::uint64_t kTruthStream = 0x7472757468ull;
constexpr std::uint64_t kBootstrapStream = 0x626f6f74ull;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Acklam's rational approximation refined by one Halley step.
double normal_quantile(double p) {
  if (p <= 0.0) return -kInf;
  if (p >= 1.0) return kInf;
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// Uniform X on the open interval (-eta, eta).
double draw_x(std::mt19937_64& rng, double eta) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = 0.0;
  while (u == 0.0) u = unit(rng);
  return -eta + 2.0 * eta * u;
}

// (w_upper - w_lower) phi(Phi^{-1}(tau)): the gap between the conditional
// sharp upper bound of a unit-variance normal mean and the mean itself.
double normal_bound_excess(double w_lower, double w_upper) {
  if (is_degenerate_band(w_lower, w_upper)) return 0.0;
  if (std::isinf(w_upper)) return w_lower < 1.0 ? kInf : 0.0;
  const double tau = *tau_balance(w_lower, w_upper, Direction::kUpper);
  return (w_upper - w_lower) * normal_pdf(normal_quantile(tau));
}

// Smallest propensity margin of the design: c beyond it leaves some X with
// e(X) <= c.
double propensity_margin(double eta) { return 1.0 / (1.0 + std::exp(eta)); }

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < count; i = next++) fn(i);
  };
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

}  // namespace

IPWSample dgp_sample(const DGPConfig& config) {
  if (config.n < 1) throw Error(ErrorCode::kConfig, "n must be positive");
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  IPWSample s;
  s.x.resize(config.n, 1);
  s.z.resize(config.n);
  s.y.resize(config.n);
  for (Index i = 0; i < config.n; ++i) {
    const double x = draw_x(rng, config.eta);
    const double z = unit(rng) < dgp_propensity(x) ? 1.0 : 0.0;
    s.x(i, 0) = x;
    s.z(i) = z;
    s.y(i) = (2.0 + x) * (z - 1.0) + noise(rng);
  }
  return s;
}

TruthResult true_bounds_c_dependence(double c, Index draws, std::uint64_t seed, double eta) {
  if (!(c >= 0.0)) throw Error(ErrorCode::kDomain, "c must be nonnegative");
  if (draws < 1) throw Error(ErrorCode::kDomain, "draws must be positive");
  TruthResult out;
  out.mc_draws = draws;
  if (c > propensity_margin(eta) + 1e-12) {
    out.infinite = true;
    out.psi_lower = -kInf;
    out.psi_upper = kInf;
    return out;
  }
  std::mt19937_64 rng(seed);
  double center = 0.0;
  double excess = 0.0;
  for (Index k = 0; k < draws; ++k) {
    const double x = draw_x(rng, eta);
    const double e = dgp_propensity(x);
    const OddsRatio odds = c_dependence_band(e, c);
    const auto [wl1, wu1] = ipw_arm_band(e, odds, 1);
    const auto [wl0, wu0] = ipw_arm_band(e, odds, 0);
    center += 2.0 + x;
    excess += normal_bound_excess(wl1, wu1) + normal_bound_excess(wl0, wu0);
  }
  center /= static_cast<double>(draws);
  excess /= static_cast<double>(draws);
  out.psi_lower = center - excess;
  out.psi_upper = center + excess;
  out.infinite = !std::isfinite(excess);
  return out;
}

double bound_envelope_normal(double c, double epsilon, Index draws, std::uint64_t seed,
                             double eta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::kDomain, "epsilon must lie in (0, 1)");
  if (draws < 1) throw Error(ErrorCode::kDomain, "draws must be positive");
  const double tail = std::sqrt(1.0 / (std::numbers::e * epsilon));
  const double base = std::sqrt(2.0 / std::numbers::pi);
  auto arm_term = [&](double wl, double wu) {
    if (wl == 1.0) return 0.0;
    if (std::isinf(wu)) return kInf;
    return (1.0 - wl) * (std::sqrt(2.0 * std::log(wu)) + base + std::pow(1.0 - wl, epsilon) * tail);
  };
  std::mt19937_64 rng(seed);
  double total = 0.0;
  for (Index k = 0; k < draws; ++k) {
    const double e = dgp_propensity(draw_x(rng, eta));
    const OddsRatio odds = c_dependence_band(e, c);
    const auto [wl1, wu1] = ipw_arm_band(e, odds, 1);
    const auto [wl0, wu0] = ipw_arm_band(e, odds, 0);
    // |lambda| = 1/e on treated rows (probability e) and 1/(1-e) on control
    // rows, so each arm enters with weight one after integrating out Z.
    total += arm_term(wl1, wu1) + arm_term(wl0, wu0);
  }
  return total / static_cast<double>(draws);
}

void SimulationConfig::validate() const {
  if (c_grid.empty()) throw Error(ErrorCode::kConfig, "c grid is empty");
  for (double c : c_grid) {
    if (!(c >= 0.0 && c < 0.5)) throw Error(ErrorCode::kConfig, "c values must lie in [0, 0.5)");
  }
  if (sims < 1) throw Error(ErrorCode::kConfig, "sims must be positive");
  if (n < 10) throw Error(ErrorCode::kConfig, "n must be at least 10");
  if (draws == 1 || draws < 0) throw Error(ErrorCode::kConfig, "bootstrap draws must be 0 or >= 2");
  if (truth_draws < 1) throw Error(ErrorCode::kConfig, "truth draws must be positive");
  if (threads < 1) throw Error(ErrorCode::kConfig, "threads must be positive");
}

std::uint64_t simulation_seed(std::uint64_t seed, int s) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s) + 1));
}

SimulationRun run_simulations(const SimulationConfig& config) {
  config.validate();
  SimulationRun run;
  run.config = config;
  const size_t grid = config.c_grid.size();
  for (double c : config.c_grid) {
    run.truth.push_back(
        true_bounds_c_dependence(c, config.truth_draws, splitmix64(config.seed ^ kTruthStream), config.eta));
  }
  std::vector<IPWConfig> configs(grid);
  for (size_t k = 0; k < grid; ++k) {
    configs[k].c = config.c_grid[k];
    configs[k].support = config.support;
  }
  run.cells.assign(static_cast<size_t>(config.sims), std::vector<SimulationCell>(grid));

  parallel_for(config.sims, config.threads, [&](int s) {
    std::vector<SimulationCell>& cells = run.cells[static_cast<size_t>(s)];
    const std::uint64_t seed = simulation_seed(config.seed, s);
    try {
      const IPWSample sample = dgp_sample({config.n, config.eta, seed});
      IPWBootstrapSpec spec;
      spec.sample = &sample;
      spec.nuisance = fit_ipw_nuisance(sample, IPWEstimand::kAte);
      spec.configs = configs;
      spec.full_refit = config.full_refit;

      const VectorXd e_hat = spec.nuisance.propensity.predict(sample.x);
      const GridPredictions grid_pred = spec.nuisance.grid.predict_sorted(
          ipw_quantile_features(sample.x, sample.z, e_hat), ipw_cells(sample.z));
      for (size_t k = 0; k < grid; ++k) {
        const BoundPair b = ipw_bounds(sample, e_hat, grid_pred, configs[k], IPWEstimand::kAte);
        cells[k].lower = b.lower.value;
        cells[k].upper = b.upper.value;
      }
      if (config.draws > 0) {
        BootstrapOptions options;
        options.draws = config.draws;
        options.seed = splitmix64(seed ^ kBootstrapStream);
        const DrawMatrix draws = bootstrap_draws(sample.size(), ipw_bootstrap_statistic(spec), options);
        for (size_t k = 0; k < grid; ++k) {
          cells[k].bootstrap = summarize_draws(draws, static_cast<Index>(2 * k),
                                               static_cast<Index>(2 * k + 1));
          // Draw pairs are summarized already; dropping them keeps large
          // experiments small in memory.
          cells[k].bootstrap.draws.clear();
          cells[k].bootstrap.draws.shrink_to_fit();
        }
      }
    } catch (const Error&) {
      for (SimulationCell& cell : cells) cell.failed = true;
    }
  });
  return run;
}

std::vector<CoverageRow> coverage_table(const SimulationRun& run) {
  std::vector<CoverageRow> rows;
  for (size_t k = 0; k < run.config.c_grid.size(); ++k) {
    CoverageRow row;
    row.c = run.config.c_grid[k];
    row.true_lower = run.truth[k].psi_lower;
    row.true_upper = run.truth[k].psi_upper;
    const double tl = row.true_lower;
    const double tu = row.true_upper;
    int used = 0;
    double draws_total = 0.0;
    double draws_infinite = 0.0;
    for (const auto& sim : run.cells) {
      const SimulationCell& cell = sim[k];
      if (cell.failed) {
        ++row.failed;
        continue;
      }
      ++used;
      const BootstrapResult& b = cell.bootstrap;
      row.set_coverage += (b.set_ci.first <= tl && b.set_ci.second >= tu);
      row.lb_coverage += (b.lb_one_sided <= tl);
      row.ub_coverage += (b.ub_one_sided >= tu);
      row.lb_coverage_two_sided += (b.lb_ci.first <= tl && tl <= b.lb_ci.second);
      row.ub_coverage_two_sided += (b.ub_ci.first <= tu && tu <= b.ub_ci.second);
      row.unbounded_estimates += (!std::isfinite(cell.lower) || !std::isfinite(cell.upper));
      row.unbounded_set_ci += (!std::isfinite(b.set_ci.first) || !std::isfinite(b.set_ci.second));
      draws_total += run.config.draws - b.n_failed;
      draws_infinite += b.n_infinite;
    }
    if (used > 0) {
      const double u = used;
      row.set_coverage /= u;
      row.lb_coverage /= u;
      row.ub_coverage /= u;
      row.lb_coverage_two_sided /= u;
      row.ub_coverage_two_sided /= u;
      row.unbounded_estimates /= u;
      row.unbounded_set_ci /= u;
    }
    row.infinite_draws = draws_total > 0.0 ? draws_infinite / draws_total : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<Figure1Row> figure1_table(const SimulationRun& run) {
  std::vector<Figure1Row> rows;
  for (size_t k = 0; k < run.config.c_grid.size(); ++k) {
    Figure1Row row;
    row.c = run.config.c_grid[k];
    row.true_lb = run.truth[k].psi_lower;
    row.true_ub = run.truth[k].psi_upper;
    std::vector<double> lower, upper;
    double sum_lb = 0.0, sum_ub = 0.0;
    int finite_lb = 0, finite_ub = 0, infinite = 0;
    for (const auto& sim : run.cells) {
      const SimulationCell& cell = sim[k];
      if (cell.failed) continue;
      lower.push_back(cell.lower);
      upper.push_back(cell.upper);
      if (std::isfinite(cell.lower)) {
        sum_lb += cell.lower;
        ++finite_lb;
      }
      if (std::isfinite(cell.upper)) {
        sum_ub += cell.upper;
        ++finite_ub;
      }
      if (!std::isfinite(cell.lower) || !std::isfinite(cell.upper)) ++infinite;
    }
    row.mean_lb = finite_lb > 0 ? sum_lb / finite_lb : kNaN;
    row.mean_ub = finite_ub > 0 ? sum_ub / finite_ub : kNaN;
    row.median_lb = lower.empty() ? kNaN : empirical_median(lower);
    row.median_ub = upper.empty() ? kNaN : empirical_median(upper);
    row.pct_infinite = lower.empty() ? kNaN : 100.0 * infinite / static_cast<double>(lower.size());
    rows.push_back(row);
  }
  return rows;
}

std::vector<Figure1Row> figure1_run(const std::vector<double>& c_grid, int sims, Index n,
                                    std::uint64_t seed, int threads) {
  SimulationConfig config;
  config.c_grid = c_grid;
  config.sims = sims;
  config.n = n;
  config.draws = 0;
  config.seed = seed;
  config.threads = threads;
  return figure1_table(run_simulations(config));
}

std::vector<CoverageRow> coverage_experiment(const SimulationConfig& config) {
  return coverage_table(run_simulations(config));
}

std::vector<std::string> coverage_header() {
  return {"c",
          "true_lb",
          "true_ub",
          "set_coverage_pct",
          "lb_coverage_pct",
          "ub_coverage_pct",
          "lb_coverage_two_sided_pct",
          "ub_coverage_two_sided_pct",
          "pct_unbounded_estimates",
          "pct_unbounded_set_ci",
          "pct_infinite_draws",
          "failed_sims"};
}

std::vector<double> coverage_values(const CoverageRow& row) {
  return {row.c,
          row.true_lower,
          row.true_upper,
          100.0 * row.set_coverage,
          100.0 * row.lb_coverage,
          100.0 * row.ub_coverage,
          100.0 * row.lb_coverage_two_sided,
          100.0 * row.ub_coverage_two_sided,
          100.0 * row.unbounded_estimates,
          100.0 * row.unbounded_set_ci,
          100.0 * row.infinite_draws,
          static_cast<double>(row.failed)};
}

std::vector<std::string> figure1_header() {
  return {"c", "mean_lb", "mean_ub", "median_lb", "median_ub", "true_lb", "true_ub", "pct_infinite"};
}

std::vector<double> figure1_values(const Figure1Row& row) {
  return {row.c,         row.mean_lb, row.mean_ub, row.median_lb,
          row.median_ub, row.true_lb, row.true_ub, row.pct_infinite};
}

}  // namespace sharpbounds
