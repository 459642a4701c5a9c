#include <algorithm>
#include <cmath>

#include "sharpbounds/nuisance.hpp"

namespace sharpbounds {

namespace {

MatrixXd with_intercept(const MatrixXd& features) {
  MatrixXd design(features.rows(), features.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(features.cols()) = features;
  return design;
}

VectorXd sigmoid(const VectorXd& eta) {
  return eta.unaryExpr([](double v) {
    const double p = 1.0 / (1.0 + std::exp(-v));
    return std::clamp(p, 1e-15, 1.0 - 1e-15);
  });
}

double mean_log_likelihood(const MatrixXd& design, const VectorXd& labels, const VectorXd& beta) {
  const VectorXd eta = design * beta;
  double total = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    // log(1 + exp(eta)) computed without overflow.
    const double softplus = eta(i) > 0 ? eta(i) + std::log1p(std::exp(-eta(i)))
                                       : std::log1p(std::exp(eta(i)));
    total += labels(i) * eta(i) - softplus;
  }
  return total / static_cast<double>(eta.size());
}

void check_labels(const VectorXd& labels) {
  for (Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 0.0 && labels(i) != 1.0) {
      throw Error(ErrorCode::kDomain, "labels must be 0 or 1");
    }
  }
  const double sum = labels.sum();
  if (sum == 0.0 || sum == static_cast<double>(labels.size())) {
    throw Error(ErrorCode::kSeparation, "labels do not vary; the likelihood has no maximizer");
  }
}

void check_rank(const MatrixXd& design) {
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw Error(ErrorCode::kSingularDesign, "design matrix is rank deficient");
  }
}

// Newton direction (X'WX)^{-1} X'(y - p) at beta.
VectorXd newton_step(const MatrixXd& design, const VectorXd& labels, const VectorXd& beta) {
  const VectorXd p = sigmoid(design * beta);
  const VectorXd weight = p.array() * (1.0 - p.array());
  const MatrixXd hessian = design.transpose() * weight.asDiagonal() * design;
  const VectorXd score = design.transpose() * (labels - p);
  Eigen::LDLT<MatrixXd> ldlt(hessian);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
    throw Error(ErrorCode::kSingularDesign, "logistic Hessian is singular");
  }
  return ldlt.solve(score);
}

}  // namespace

VectorXd PropensityModel::predict(const MatrixXd& features) const {
  return sigmoid(with_intercept(features) * coefficients);
}

VectorXd logistic_gradient(const VectorXd& coefficients, const MatrixXd& features,
                           const VectorXd& labels) {
  const MatrixXd design = with_intercept(features);
  const VectorXd p = sigmoid(design * coefficients);
  return design.transpose() * (labels - p) / static_cast<double>(labels.size());
}

PropensityModel fit_logistic(const MatrixXd& features, const VectorXd& labels,
                             const LogisticOptions& options) {
  if (features.rows() != labels.size() || labels.size() == 0) {
    throw Error(ErrorCode::kDomain, "features and labels differ in length");
  }
  check_labels(labels);
  const MatrixXd design = with_intercept(features);
  check_rank(design);

  PropensityModel model;
  model.coefficients = VectorXd::Zero(design.cols());
  const double base_rate = labels.mean();
  model.coefficients(0) = std::log(base_rate / (1.0 - base_rate));

  double loglik = mean_log_likelihood(design, labels, model.coefficients);
  for (int it = 1; it <= options.max_iterations; ++it) {
    const VectorXd step = newton_step(design, labels, model.coefficients);
    // Step halving keeps the likelihood monotone far from the optimum.
    double scale = 1.0;
    VectorXd candidate = model.coefficients + step;
    double cand_loglik = mean_log_likelihood(design, labels, candidate);
    while (cand_loglik < loglik - 1e-15 && scale > 1e-6) {
      scale *= 0.5;
      candidate = model.coefficients + scale * step;
      cand_loglik = mean_log_likelihood(design, labels, candidate);
    }
    model.coefficients = candidate;
    loglik = cand_loglik;
    model.iterations = it;

    if (loglik > -1e-9 || model.coefficients.cwiseAbs().maxCoeff() > 1e6) {
      throw Error(ErrorCode::kSeparation, "labels are perfectly separated by the features");
    }
    if ((scale * step).cwiseAbs().maxCoeff() < options.step_tolerance) {
      model.converged = true;
      break;
    }
  }
  return model;
}

PropensityModel one_step_update(const PropensityModel& model, const MatrixXd& features,
                                const VectorXd& labels) {
  if (features.rows() != labels.size()) {
    throw Error(ErrorCode::kDomain, "features and labels differ in length");
  }
  check_labels(labels);
  const MatrixXd design = with_intercept(features);
  if (design.cols() != model.coefficients.size()) {
    throw Error(ErrorCode::kDomain, "feature count does not match the model");
  }
  PropensityModel updated = model;
  updated.coefficients = model.coefficients + newton_step(design, labels, model.coefficients);
  updated.iterations = 1;
  updated.converged = false;
  return updated;
}

}  // namespace sharpbounds
