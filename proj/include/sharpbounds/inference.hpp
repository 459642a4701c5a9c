#pragma once

// Percentile bootstrap for identified sets. Draws are resampled row indices
// with per-draw seeds, so results do not depend on the worker count.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "sharpbounds/applications.hpp"

namespace sharpbounds {

using Interval = std::pair<double, double>;

/// SplitMix64 finalizer; used to derive independent seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Order statistic at ceil(level * B) (1-based, clamped to [1, B]) with
/// -inf sorted first and +inf last.
double empirical_quantile(std::vector<double> values, double level);

/// Median with infinities sorted to the ends; the mean of the two middle
/// order statistics for even counts.
double empirical_median(std::vector<double> values);

struct BootstrapOptions {
  int draws = 500;
  std::uint64_t seed = 0;
  int threads = 1;
  double max_failed_share = 0.05;
};

/// Maps resampled row indices to a vector of statistics.
using DrawStatistic = std::function<VectorXd(std::span<const Index> rows)>;

struct DrawMatrix {
  MatrixXd values;          // draws x statistics; rows of failed draws are NaN
  std::vector<char> failed;
  int n_failed = 0;
};

/// Evaluates `statistic` on `options.draws` resamples of n rows. A draw whose
/// statistic throws sharpbounds::Error is marked failed; more than
/// max_failed_share failures throws kBootstrapUnstable.
DrawMatrix bootstrap_draws(Index n, const DrawStatistic& statistic, const BootstrapOptions& options);

/// The row indices of draw b.
std::vector<Index> resample_rows(Index n, std::uint64_t seed, int b);

struct BootstrapResult {
  Interval set_ci{0.0, 0.0};
  // Two-sided 95% intervals for each bound.
  Interval lb_ci{0.0, 0.0};
  Interval ub_ci{0.0, 0.0};
  // One-sided 95% limits: q.05 of the lower draws and q.95 of the upper draws.
  double lb_one_sided = 0.0;
  double ub_one_sided = 0.0;
  std::vector<Interval> draws;  // successful draws only, in draw order
  int n_infinite = 0;           // draws with at least one infinite bound
  int n_failed = 0;
};

/// Summary of paired lower/upper draw columns, failed draws excluded.
BootstrapResult summarize_draws(const DrawMatrix& draws, Index lower_col, Index upper_col);

/// Percentile bootstrap of a (lower, upper) estimator.
BootstrapResult percentile_bootstrap(
    Index n, const std::function<Interval(std::span<const Index> rows)>& estimator,
    const BootstrapOptions& options);

// ---------------------------------------------------------------------------
// IPW bootstrap: one-step propensity update, frozen quantile grid.

struct IPWBootstrapSpec {
  const IPWSample* sample = nullptr;
  IPWNuisance nuisance;
  std::vector<IPWConfig> configs;
  // Refit the propensity and the quantile grid on every draw instead.
  bool full_refit = false;
};

/// Statistic returning (lower, upper) for each config in order.
DrawStatistic ipw_bootstrap_statistic(const IPWBootstrapSpec& spec);

}  // namespace sharpbounds
