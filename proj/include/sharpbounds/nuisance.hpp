#pragma once

// Nuisance estimates feeding the plug-in bounds: logistic propensities and a
// grid of linear conditional quantile fits of lambda-hat * Y.

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "sharpbounds/core_bounds.hpp"

namespace sharpbounds {

// ---------------------------------------------------------------------------
// Logistic regression.

struct PropensityModel {
  VectorXd coefficients;  // intercept first, then one slope per feature column
  bool converged = false;
  int iterations = 0;

  /// P(Z = 1 | features) for each row; features exclude the intercept.
  VectorXd predict(const MatrixXd& features) const;
};

struct LogisticOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-8;
};

/// Maximum likelihood by Newton-Raphson (IRLS). Throws kSeparation when the
/// labels do not vary or the likelihood has no finite maximizer, and
/// kSingularDesign for rank-deficient designs.
PropensityModel fit_logistic(const MatrixXd& features, const VectorXd& labels,
                             const LogisticOptions& options = {});

/// Exactly one Newton step of the logistic likelihood on new data starting
/// from `model`'s coefficients.
PropensityModel one_step_update(const PropensityModel& model, const MatrixXd& features,
                                const VectorXd& labels);

/// Score of the mean log-likelihood at `coefficients`.
VectorXd logistic_gradient(const VectorXd& coefficients, const MatrixXd& features,
                           const VectorXd& labels);

// ---------------------------------------------------------------------------
// Linear quantile regression.

/// Mean check loss of residuals y - X b at level tau.
double check_loss(const MatrixXd& design, const VectorXd& response, const VectorXd& coefficients,
                  double tau);

/// Linear quantile regression at level tau in (0, 1) by a primal-dual
/// interior-point method on the bounded dual LP (Frisch-Newton). The design
/// is used as given; include an intercept column if wanted.
VectorXd quantile_regression(const MatrixXd& design, const VectorXd& response, double tau);

// ---------------------------------------------------------------------------
// Quantile grid.

// Grid predictions, one row of 101 rearranged values per observation.
using GridPredictions = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct QuantileGridModel {
  static constexpr int kLevels = 101;

  // Column k holds the coefficients of level k/100. Columns 0 and 100 are
  // unused: those levels are the within-cell response minimum and maximum.
  MatrixXd coefficients;
  VectorXd cell_min;
  VectorXd cell_max;
  std::string recipe;

  static double level(int k) { return k / 100.0; }

  /// Grid index nearest to tau_hat, ties rounding down.
  static int nearest_level(double tau_hat);

  /// Rearranged (sorted) predictions at all 101 levels for one row.
  Eigen::Matrix<double, kLevels, 1> predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& features,
                                                Index cell = 0) const;

  /// Rearranged predictions for many rows, one row of 101 values each.
  GridPredictions predict_sorted(const MatrixXd& features,
                                 std::span<const Index> cells = {}) const;

  double predict_quantile(const Eigen::Ref<const Eigen::RowVectorXd>& features, double tau_hat,
                          Index cell = 0) const;
};

/// Fits levels 0.01, ..., 0.99 by quantile_regression and records the
/// per-cell response extremes for levels 0 and 1. `cells` assigns each row to
/// a cell 0..C-1 (one cell when empty).
QuantileGridModel fit_quantile_grid(const MatrixXd& features, const VectorXd& response,
                                    std::span<const Index> cells = {}, std::string recipe = {});

}  // namespace sharpbounds
