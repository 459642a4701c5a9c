#include <cmath>

#include "sharpbounds/applications.hpp"

namespace sharpbounds {

VectorXd ols_lambda(const MatrixXd& x, const VectorXd& delta) {
  if (x.cols() != delta.size()) {
    throw Error(ErrorCode::kDomain, "delta needs one entry per column of X");
  }
  if (delta.size() == 0 || delta(0) != 0.0) {
    throw Error(ErrorCode::kConfig, "delta must put no weight on the intercept");
  }
  const double n = static_cast<double>(x.rows());
  const MatrixXd gram = x.transpose() * x / n;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(gram);
  if (qr.rank() < gram.cols()) throw Error(ErrorCode::kSingularDesign, "X'X is singular");
  return x * qr.solve(delta);
}

BoundPair ols_bounds(const VectorXd& y, const MatrixXd& x, const OLSConfig& config) {
  if (x.rows() != y.size()) throw Error(ErrorCode::kDomain, "X and y differ in length");
  BoundProblem problem;
  problem.lambda = ols_lambda(x, config.delta);
  problem.outcome = y;
  problem.band = SensitivityBand::constant(y.size(), config.w_lower, config.w_upper);
  problem.group = config.group.empty() ? std::vector<Index>(static_cast<size_t>(y.size()), 0)
                                       : config.group;
  BoundPair out;
  problem.direction = Direction::kLower;
  out.lower = sharp_bound_exact(problem);
  problem.direction = Direction::kUpper;
  out.upper = sharp_bound_exact(problem);
  return out;
}

}  // namespace sharpbounds
