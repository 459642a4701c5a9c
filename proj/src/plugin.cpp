#include "sharpbounds/applications.hpp"

namespace sharpbounds {

VectorXd plugin_quantiles(const SensitivityBand& band, const GridPredictions& sorted_grid,
                          Direction direction, OutcomeSupport support) {
  const Index n = band.size();
  if (sorted_grid.rows() != n || sorted_grid.cols() != QuantileGridModel::kLevels) {
    throw Error(ErrorCode::kDomain, "grid predictions must be n x 101");
  }
  const bool upper = direction == Direction::kUpper;
  VectorXd q(n);
  for (Index i = 0; i < n; ++i) {
    const double wl = band.lower(i);
    const double wu = band.upper(i);
    const auto tau = tau_balance(wl, wu, direction);
    if (!tau) {
      q(i) = 0.0;  // never read: the identity band pins the weight at one
    } else if (std::isinf(wu)) {
      if (support == OutcomeSupport::kUnbounded) {
        q(i) = upper ? kInf : -kInf;
      } else {
        q(i) = sorted_grid(i, upper ? QuantileGridModel::kLevels - 1 : 0);
      }
    } else {
      q(i) = sorted_grid(i, QuantileGridModel::nearest_level(*tau));
    }
  }
  return q;
}

BoundPair plugin_bounds(const VectorXd& lambda, const VectorXd& outcome,
                        const SensitivityBand& band, const GridPredictions& sorted_grid,
                        OutcomeSupport support) {
  BoundProblem problem;
  problem.lambda = lambda;
  problem.outcome = outcome;
  problem.band = band;

  BoundPair out;
  problem.direction = Direction::kLower;
  out.lower = sharp_bound(problem, plugin_quantiles(band, sorted_grid, Direction::kLower, support));
  problem.direction = Direction::kUpper;
  out.upper = sharp_bound(problem, plugin_quantiles(band, sorted_grid, Direction::kUpper, support));
  return out;
}

}  // namespace sharpbounds
