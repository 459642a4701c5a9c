#pragma once

// Closed-form sharp bounds on E_true[lambda(R) Y] when the likelihood ratio
// W = dP_true/dP_obs is confined to [w_lower(R), w_upper(R)] with E[W|R] = 1.
//
// The optimal adversarial weight puts w_upper on lambda*Y above the
// tau(R)-quantile of lambda*Y | R and w_lower below it, with tau(R) chosen so
// the conditional mean of W is one. Everything here is exact arithmetic on
// finite (probability-weighted) samples; estimation of the quantiles for
// continuous covariates lives in nuisance.hpp.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sharpbounds/error.hpp"

namespace sharpbounds {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Direction { kUpper, kLower };

inline Direction opposite(Direction d) {
  return d == Direction::kUpper ? Direction::kLower : Direction::kUpper;
}

// ---------------------------------------------------------------------------
// Scalar kernels.

template <typename Scalar>
bool is_valid_band(Scalar w_lower, Scalar w_upper) {
  return std::isfinite(w_lower) && w_lower >= Scalar(0) && w_lower <= Scalar(1) &&
         w_upper >= Scalar(1) && !std::isnan(w_upper);
}

template <typename Scalar>
bool is_degenerate_band(Scalar w_lower, Scalar w_upper) {
  return w_lower == Scalar(1) && w_upper == Scalar(1);
}

/// Quantile level at which the two-valued optimal weight has conditional mean
/// one: (w_upper - 1)/(w_upper - w_lower) for the upper bound and
/// (1 - w_lower)/(w_upper - w_lower) for the lower bound. An infinite cap
/// gives 1 (upper) or 0 (lower). The identity band [1, 1] has no balancing
/// level and returns nullopt; the bound then collapses to E[lambda Y].
template <typename Scalar>
std::optional<Scalar> tau_balance(Scalar w_lower, Scalar w_upper, Direction direction) {
  if (!is_valid_band(w_lower, w_upper)) {
    throw Error(ErrorCode::kInvalidBand, "band must satisfy 0 <= w_lower <= 1 <= w_upper");
  }
  if (is_degenerate_band(w_lower, w_upper)) return std::nullopt;
  if (std::isinf(w_upper)) {
    return direction == Direction::kUpper ? Scalar(1) : Scalar(0);
  }
  const Scalar span = w_upper - w_lower;
  return direction == Direction::kUpper ? (w_upper - Scalar(1)) / span
                                        : (Scalar(1) - w_lower) / span;
}

/// Deviation of the optimal weight from one at outcome position lambda_y
/// relative to the balancing quantile q. Upper: (w_upper - w_lower)1{ly > q}
/// - (1 - w_lower). Lower: the same with the indicator flipped to 1{ly < q},
/// which is the upper kernel applied to (-ly, -q).
template <typename Scalar>
Scalar adversarial_effect(Scalar w_lower, Scalar w_upper, Scalar lambda_y, Scalar q,
                          Direction direction) {
  const bool above = direction == Direction::kUpper ? lambda_y > q : lambda_y < q;
  if (above) {
    if (std::isinf(w_upper)) return std::numeric_limits<Scalar>::infinity();
    return w_upper - Scalar(1);
  }
  return w_lower - Scalar(1);
}

/// One observation's contribution ly + (ly - q) a(.) to the bound moment.
/// Zero adversarial effect short-circuits so that an infinite quantile next
/// to a pinned weight contributes ly (the -inf * 0 = 0 convention).
template <typename Scalar>
Scalar bound_moment_term(Scalar w_lower, Scalar w_upper, Scalar lambda_y, Scalar q,
                         Direction direction) {
  if (is_degenerate_band(w_lower, w_upper)) return lambda_y;
  const Scalar a = adversarial_effect(w_lower, w_upper, lambda_y, q, direction);
  if (a == Scalar(0)) return lambda_y;
  return lambda_y + (lambda_y - q) * a;
}

// ---------------------------------------------------------------------------
// Problem and result types.

struct SensitivityBand {
  VectorXd lower;
  VectorXd upper;  // entries may be +inf

  static SensitivityBand constant(Index n, double w_lower, double w_upper);
  static SensitivityBand identity(Index n) { return constant(n, 1.0, 1.0); }

  Index size() const { return lower.size(); }
  void validate() const;
  bool has_infinite_cap() const;
};

/// One instance of sup/inf_W E[W lambda(R) Y] s.t. W in band, E[W|R] = 1.
///
/// `mass` holds the probability of each observation (uniform when left
/// empty). `group` maps observations to conditioning cells 0..G-1; an empty
/// group vector means every observation is its own cell, which is how the
/// plug-in estimator treats continuous R with model-based quantiles.
struct BoundProblem {
  VectorXd lambda;
  VectorXd outcome;
  VectorXd mass;
  SensitivityBand band;
  Direction direction = Direction::kUpper;
  std::vector<Index> group;

  Index size() const { return lambda.size(); }
  Index num_groups() const;
  Index group_of(Index i) const { return group.empty() ? i : group[static_cast<size_t>(i)]; }
  double mass_of(Index i) const {
    return mass.size() == 0 ? 1.0 / static_cast<double>(size()) : mass(i);
  }
  VectorXd lambda_y() const { return lambda.cwiseProduct(outcome); }

  /// Throws on shape mismatches, non-finite lambda, bad masses, invalid
  /// bands, or bands that vary within a cell.
  void validate() const;

  /// The same problem with lambda negated and the direction flipped. The
  /// lower bound of a problem is minus the upper bound of its mirror.
  BoundProblem mirrored() const;
};

struct OptimalWeights {
  VectorXd w_star;          // per observation
  VectorXd tau;             // per group
  VectorXd alpha;           // per group
  VectorXd quantile_value;  // per group
};

struct BoundResult {
  double value = 0.0;
  bool finite = true;
  Direction direction = Direction::kUpper;
  std::pair<double, double> tau_range{0.0, 0.0};
  // Probability mass strictly below and strictly above the quantile, which the
  // optimal weight holds at w_lower and w_upper. Atoms at the quantile are excluded.
  std::pair<double, double> cap_fractions{0.0, 0.0};
};

struct BoundPair {
  BoundResult lower;
  BoundResult upper;
};

// ---------------------------------------------------------------------------
// Operations.

/// Mixing weight alpha at an atom q of a discrete cell so that
/// w_lower P(ly < q) + w_upper P(ly > q) + (alpha w_lower + (1 - alpha)
/// w_upper) P(ly = q) = 1 (upper direction). Returns 0.5 when the atom is
/// absent or the band has zero width. Throws kInconsistentQuantile when q is
/// not a balancing-level quantile of the cell.
double mass_point_alpha(std::span<const double> values, std::span<const double> probs,
                        double w_lower, double w_upper, double q);

/// Exact tau(R)-level quantile of lambda*Y within each cell under the
/// problem's masses, for the problem's direction. Infinite caps give the cell
/// maximum (upper) or minimum (lower). Identity-band cells get their median,
/// which the bound never reads.
VectorXd exact_group_quantiles(const BoundProblem& problem);

/// Quantile-balancing weights with the atom correction. Throws
/// kUnsupportedInfiniteCap when any cap is infinite.
OptimalWeights optimal_weights(const BoundProblem& problem, const VectorXd& quantiles);

/// E[ly + (ly - q) a(w_lower, w_upper, ly, q)] over the problem's masses,
/// with q the per-group quantile. Valid with atoms at q and with infinite
/// caps; infinite values are reported with finite = false.
BoundResult sharp_bound(const BoundProblem& problem, const VectorXd& quantiles);

/// sharp_bound at the exact per-cell quantiles.
BoundResult sharp_bound_exact(const BoundProblem& problem);

/// The first-order form E[ly + ly a(.)]. Agrees with sharp_bound only when
/// no cell has an atom at its quantile and every cap is finite.
BoundResult sharp_bound_continuous(const BoundProblem& problem, const VectorXd& quantiles);

/// Bound with w_upper = +inf: E[w_lower ly + (1 - w_lower) Q1] for the upper
/// direction, where `extreme` is the per-group supremum of lambda*Y (infimum
/// for the lower direction). Any cell with w_lower < 1 and an infinite
/// extreme makes the bound infinite.
BoundResult bound_infinite_cap(const BoundProblem& problem, const VectorXd& extreme);

}  // namespace sharpbounds
