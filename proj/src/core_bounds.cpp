#include "sharpbounds/core_bounds.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace sharpbounds {

namespace {

constexpr double kMassTolerance = 1e-9;
constexpr double kLevelTolerance = 1e-12;

struct Cell {
  std::vector<double> values;
  std::vector<double> probs;
  double w_lower = 1.0;
  double w_upper = 1.0;
};

// Observations of each cell with masses renormalized to sum to one.
std::vector<Cell> collect_cells(const BoundProblem& problem, const VectorXd& lambda_y) {
  std::vector<Cell> cells(static_cast<size_t>(problem.num_groups()));
  for (Index i = 0; i < problem.size(); ++i) {
    Cell& cell = cells[static_cast<size_t>(problem.group_of(i))];
    cell.values.push_back(lambda_y(i));
    cell.probs.push_back(problem.mass_of(i));
    cell.w_lower = problem.band.lower(i);
    cell.w_upper = problem.band.upper(i);
  }
  for (Cell& cell : cells) {
    const double total = std::accumulate(cell.probs.begin(), cell.probs.end(), 0.0);
    if (total > 0.0) {
      for (double& p : cell.probs) p /= total;
    }
  }
  return cells;
}

// inf{x : F(x) >= level} over the positive-mass support points.
double cell_quantile(const Cell& cell, double level) {
  std::vector<size_t> order(cell.values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return cell.values[a] < cell.values[b]; });
  double cumulative = 0.0;
  double last = cell.values.empty() ? 0.0 : cell.values[order.front()];
  for (size_t k : order) {
    if (cell.probs[k] <= 0.0) continue;
    cumulative += cell.probs[k];
    last = cell.values[k];
    if (cumulative >= level - kLevelTolerance) return last;
  }
  return last;
}

// Upper-direction evaluation shared by sharp_bound and its mirror.
BoundResult upper_moment(const BoundProblem& problem, const VectorXd& quantiles) {
  const VectorXd lambda_y = problem.lambda_y();
  const Index groups = problem.num_groups();
  std::vector<char> seen(static_cast<size_t>(groups), 0);

  double total = 0.0;
  double at_lower = 0.0;
  double at_upper = 0.0;
  double tau_min = kInf;
  double tau_max = -kInf;

  for (Index i = 0; i < problem.size(); ++i) {
    const Index g = problem.group_of(i);
    const double wl = problem.band.lower(i);
    const double wu = problem.band.upper(i);
    const double q = quantiles(g);
    const double p = problem.mass_of(i);
    const double ly = lambda_y(i);

    const auto tau = tau_balance(wl, wu, Direction::kUpper);
    if (!seen[static_cast<size_t>(g)]) {
      seen[static_cast<size_t>(g)] = 1;
      if (tau) {
        tau_min = std::min(tau_min, *tau);
        tau_max = std::max(tau_max, *tau);
      }
    }
    if (p == 0.0) continue;
    total += p * bound_moment_term(wl, wu, ly, q, Direction::kUpper);
    if (tau) {
      if (ly > q) at_upper += p;
      if (ly < q) at_lower += p;
    }
  }

  BoundResult result;
  result.direction = Direction::kUpper;
  result.value = total;
  result.finite = std::isfinite(total);
  if (tau_min <= tau_max) result.tau_range = {tau_min, tau_max};
  result.cap_fractions = {at_lower, at_upper};
  return result;
}

BoundResult negate_to_lower(BoundResult mirror) {
  BoundResult result = mirror;
  result.direction = Direction::kLower;
  result.value = -mirror.value;
  result.tau_range = {1.0 - mirror.tau_range.second, 1.0 - mirror.tau_range.first};
  return result;
}

}  // namespace

SensitivityBand SensitivityBand::constant(Index n, double w_lower, double w_upper) {
  SensitivityBand band;
  band.lower = VectorXd::Constant(n, w_lower);
  band.upper = VectorXd::Constant(n, w_upper);
  return band;
}

void SensitivityBand::validate() const {
  if (lower.size() != upper.size()) {
    throw Error(ErrorCode::kInvalidBand, "lower and upper have different lengths");
  }
  for (Index i = 0; i < lower.size(); ++i) {
    if (!is_valid_band(lower(i), upper(i))) {
      throw Error(ErrorCode::kInvalidBand,
                  "observation " + std::to_string(i) + " violates 0 <= w_lower <= 1 <= w_upper");
    }
  }
}

bool SensitivityBand::has_infinite_cap() const {
  return (upper.array() == kInf).any();
}

Index BoundProblem::num_groups() const {
  if (group.empty()) return size();
  return *std::max_element(group.begin(), group.end()) + 1;
}

void BoundProblem::validate() const {
  const Index n = size();
  if (n == 0) throw Error(ErrorCode::kDomain, "bound problem has no observations");
  if (outcome.size() != n || band.size() != n) {
    throw Error(ErrorCode::kDomain, "lambda, outcome and band lengths differ");
  }
  if (!lambda.allFinite()) throw Error(ErrorCode::kDomain, "lambda must be finite");
  if (!outcome.allFinite()) throw Error(ErrorCode::kDomain, "outcome must be finite");
  band.validate();
  if (mass.size() != 0) {
    if (mass.size() != n) throw Error(ErrorCode::kDomain, "mass length differs");
    if ((mass.array() < 0.0).any() || !mass.allFinite()) {
      throw Error(ErrorCode::kDomain, "masses must be finite and nonnegative");
    }
    if (std::abs(mass.sum() - 1.0) > kMassTolerance) {
      throw Error(ErrorCode::kDomain, "masses must sum to one");
    }
  }
  if (!group.empty()) {
    if (static_cast<Index>(group.size()) != n) {
      throw Error(ErrorCode::kDomain, "group length differs");
    }
    const Index groups = num_groups();
    std::vector<Index> first(static_cast<size_t>(groups), -1);
    for (Index i = 0; i < n; ++i) {
      const Index g = group[static_cast<size_t>(i)];
      if (g < 0) throw Error(ErrorCode::kDomain, "negative group key");
      Index& f = first[static_cast<size_t>(g)];
      if (f < 0) {
        f = i;
      } else if (band.lower(i) != band.lower(f) || band.upper(i) != band.upper(f)) {
        throw Error(ErrorCode::kInvalidBand,
                    "band varies within cell " + std::to_string(g));
      }
    }
  }
}

BoundProblem BoundProblem::mirrored() const {
  BoundProblem m = *this;
  m.lambda = -lambda;
  m.direction = opposite(direction);
  return m;
}

double mass_point_alpha(std::span<const double> values, std::span<const double> probs,
                        double w_lower, double w_upper, double q) {
  if (values.size() != probs.size()) {
    throw Error(ErrorCode::kDomain, "values and probabilities differ in length");
  }
  if (std::isinf(w_upper)) {
    throw Error(ErrorCode::kUnsupportedInfiniteCap, "mass-point weight needs a finite cap");
  }
  const auto tau = tau_balance(w_lower, w_upper, Direction::kUpper);
  if (!tau || w_upper == w_lower) return 0.5;

  double total = 0.0, below = 0.0, at = 0.0;
  for (size_t k = 0; k < values.size(); ++k) {
    total += probs[k];
    if (values[k] < q) below += probs[k];
    if (values[k] == q) at += probs[k];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kDomain, "cell has no mass");
  below /= total;
  at /= total;

  if (below > *tau + 1e-9 || below + at < *tau - 1e-9) {
    throw Error(ErrorCode::kInconsistentQuantile,
                "q is not a tau-quantile of the cell (tau = " + std::to_string(*tau) + ")");
  }
  if (at == 0.0) return 0.5;

  const double excess = w_lower * below + w_upper * (1.0 - below) - 1.0;
  const double alpha = excess / ((w_upper - w_lower) * at);
  if (alpha < -1e-9 || alpha > 1.0 + 1e-9) {
    throw Error(ErrorCode::kInconsistentQuantile, "mass-point weight outside [0, 1]");
  }
  return std::clamp(alpha, 0.0, 1.0);
}

VectorXd exact_group_quantiles(const BoundProblem& problem) {
  problem.validate();
  const std::vector<Cell> cells = collect_cells(problem, problem.lambda_y());
  VectorXd q(static_cast<Index>(cells.size()));
  for (size_t g = 0; g < cells.size(); ++g) {
    const Cell& cell = cells[g];
    if (cell.values.empty()) {
      q(static_cast<Index>(g)) = 0.0;
      continue;
    }
    const auto tau = tau_balance(cell.w_lower, cell.w_upper, problem.direction);
    q(static_cast<Index>(g)) = cell_quantile(cell, tau.value_or(0.5));
  }
  return q;
}

OptimalWeights optimal_weights(const BoundProblem& problem, const VectorXd& quantiles) {
  problem.validate();
  if (problem.band.has_infinite_cap()) {
    throw Error(ErrorCode::kUnsupportedInfiniteCap,
                "optimal weights need finite caps; use bound_infinite_cap");
  }
  if (quantiles.size() != problem.num_groups()) {
    throw Error(ErrorCode::kDomain, "one quantile per group required");
  }

  // Lower-direction weights are the upper-direction weights of the mirror.
  const bool lower = problem.direction == Direction::kLower;
  const VectorXd ly = lower ? VectorXd(-problem.lambda_y()) : problem.lambda_y();
  const VectorXd q = lower ? VectorXd(-quantiles) : quantiles;

  const std::vector<Cell> cells = collect_cells(problem, ly);
  const Index groups = static_cast<Index>(cells.size());

  OptimalWeights out;
  out.w_star.resize(problem.size());
  out.tau = VectorXd::Zero(groups);
  out.alpha = VectorXd::Constant(groups, 0.5);
  out.quantile_value = quantiles;

  for (Index g = 0; g < groups; ++g) {
    const Cell& cell = cells[static_cast<size_t>(g)];
    if (cell.values.empty()) continue;
    const auto tau = tau_balance(cell.w_lower, cell.w_upper, problem.direction);
    out.tau(g) = tau.value_or(0.0);
    out.alpha(g) = mass_point_alpha(cell.values, cell.probs, cell.w_lower, cell.w_upper, q(g));
  }

  for (Index i = 0; i < problem.size(); ++i) {
    const Index g = problem.group_of(i);
    const double wl = problem.band.lower(i);
    const double wu = problem.band.upper(i);
    if (is_degenerate_band(wl, wu)) {
      out.w_star(i) = 1.0;
    } else if (ly(i) > q(g)) {
      out.w_star(i) = wu;
    } else if (ly(i) < q(g)) {
      out.w_star(i) = wl;
    } else {
      out.w_star(i) = out.alpha(g) * wl + (1.0 - out.alpha(g)) * wu;
    }
  }
  return out;
}

BoundResult sharp_bound(const BoundProblem& problem, const VectorXd& quantiles) {
  problem.validate();
  if (quantiles.size() != problem.num_groups()) {
    throw Error(ErrorCode::kDomain, "one quantile per group required");
  }
  if (problem.direction == Direction::kUpper) return upper_moment(problem, quantiles);
  return negate_to_lower(upper_moment(problem.mirrored(), -quantiles));
}

BoundResult sharp_bound_exact(const BoundProblem& problem) {
  return sharp_bound(problem, exact_group_quantiles(problem));
}

BoundResult sharp_bound_continuous(const BoundProblem& problem, const VectorXd& quantiles) {
  problem.validate();
  if (quantiles.size() != problem.num_groups()) {
    throw Error(ErrorCode::kDomain, "one quantile per group required");
  }
  const VectorXd ly = problem.lambda_y();
  double total = 0.0;
  for (Index i = 0; i < problem.size(); ++i) {
    const double wl = problem.band.lower(i);
    const double wu = problem.band.upper(i);
    double term = ly(i);
    if (!is_degenerate_band(wl, wu)) {
      term += ly(i) * adversarial_effect(wl, wu, ly(i), quantiles(problem.group_of(i)),
                                         problem.direction);
    }
    total += problem.mass_of(i) * term;
  }
  BoundResult result;
  result.direction = problem.direction;
  result.value = total;
  result.finite = std::isfinite(total);
  return result;
}

BoundResult bound_infinite_cap(const BoundProblem& problem, const VectorXd& extreme) {
  problem.validate();
  if (extreme.size() != problem.num_groups()) {
    throw Error(ErrorCode::kDomain, "one extreme value per group required");
  }
  if (!(problem.band.upper.array() == kInf).all()) {
    throw Error(ErrorCode::kInvalidBand, "bound_infinite_cap requires w_upper = +inf");
  }
  if (problem.direction == Direction::kLower) {
    return negate_to_lower(bound_infinite_cap(problem.mirrored(), -extreme));
  }

  const VectorXd ly = problem.lambda_y();
  double total = 0.0;
  double at_lower = 0.0;
  for (Index i = 0; i < problem.size(); ++i) {
    const double p = problem.mass_of(i);
    if (p == 0.0) continue;
    const double wl = problem.band.lower(i);
    const double q1 = extreme(problem.group_of(i));
    total += p * wl * ly(i);
    if (wl < 1.0) total += p * (1.0 - wl) * q1;
    if (ly(i) < q1) at_lower += p;
  }
  BoundResult result;
  result.direction = Direction::kUpper;
  result.value = total;
  result.finite = std::isfinite(total);
  result.tau_range = {1.0, 1.0};
  result.cap_fractions = {at_lower, 0.0};
  return result;
}

}  // namespace sharpbounds
