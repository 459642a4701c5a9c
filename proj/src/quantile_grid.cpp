#include <algorithm>
#include <cmath>

#include "sharpbounds/nuisance.hpp"

namespace sharpbounds {

namespace {

// Rows come out of the per-level fits nearly sorted, so insertion sort is
// the cheap way to rearrange them.
template <typename Row>
void rearrange(Row&& row) {
  for (Index k = 1; k < row.size(); ++k) {
    const double v = row(k);
    Index j = k;
    while (j > 0 && row(j - 1) > v) {
      row(j) = row(j - 1);
      --j;
    }
    row(j) = v;
  }
}

Index cell_at(std::span<const Index> cells, Index i) {
  return cells.empty() ? 0 : cells[static_cast<size_t>(i)];
}

}  // namespace

int QuantileGridModel::nearest_level(double tau_hat) {
  const double x = std::clamp(tau_hat, 0.0, 1.0) * 100.0;
  int k = static_cast<int>(std::floor(x));
  if (x - k > 0.5 + 1e-9) ++k;
  return std::min(k, kLevels - 1);
}

Eigen::Matrix<double, QuantileGridModel::kLevels, 1> QuantileGridModel::predict_row(
    const Eigen::Ref<const Eigen::RowVectorXd>& features, Index cell) const {
  if (features.size() != coefficients.rows()) {
    throw Error(ErrorCode::kDomain, "feature count does not match the quantile grid");
  }
  if (cell < 0 || cell >= cell_min.size()) throw Error(ErrorCode::kDomain, "unknown cell");
  Eigen::Matrix<double, kLevels, 1> values = (features * coefficients).transpose();
  values(0) = cell_min(cell);
  values(kLevels - 1) = cell_max(cell);
  rearrange(values);
  return values;
}

GridPredictions QuantileGridModel::predict_sorted(const MatrixXd& features,
                                                  std::span<const Index> cells) const {
  if (features.cols() != coefficients.rows()) {
    throw Error(ErrorCode::kDomain, "feature count does not match the quantile grid");
  }
  if (!cells.empty() && static_cast<Index>(cells.size()) != features.rows()) {
    throw Error(ErrorCode::kDomain, "cells and features differ in length");
  }
  GridPredictions values;
  values.noalias() = features * coefficients;
  for (Index i = 0; i < values.rows(); ++i) {
    const Index cell = cell_at(cells, i);
    if (cell < 0 || cell >= cell_min.size()) throw Error(ErrorCode::kDomain, "unknown cell");
    values(i, 0) = cell_min(cell);
    values(i, kLevels - 1) = cell_max(cell);
    rearrange(values.row(i));
  }
  return values;
}

double QuantileGridModel::predict_quantile(const Eigen::Ref<const Eigen::RowVectorXd>& features,
                                           double tau_hat, Index cell) const {
  return predict_row(features, cell)(nearest_level(tau_hat));
}

QuantileGridModel fit_quantile_grid(const MatrixXd& features, const VectorXd& response,
                                    std::span<const Index> cells, std::string recipe) {
  const Index n = features.rows();
  if (response.size() != n) throw Error(ErrorCode::kDomain, "features and response differ in length");
  if (!cells.empty() && static_cast<Index>(cells.size()) != n) {
    throw Error(ErrorCode::kDomain, "cells and features differ in length");
  }
  QuantileGridModel model;
  model.recipe = std::move(recipe);

  Index num_cells = 1;
  for (Index c : cells) {
    if (c < 0) throw Error(ErrorCode::kDomain, "cell indices must be nonnegative");
    num_cells = std::max(num_cells, c + 1);
  }
  model.cell_min = VectorXd::Constant(num_cells, kInf);
  model.cell_max = VectorXd::Constant(num_cells, -kInf);
  for (Index i = 0; i < n; ++i) {
    const Index c = cell_at(cells, i);
    model.cell_min(c) = std::min(model.cell_min(c), response(i));
    model.cell_max(c) = std::max(model.cell_max(c), response(i));
  }
  for (Index c = 0; c < num_cells; ++c) {
    if (model.cell_min(c) > model.cell_max(c)) {
      throw Error(ErrorCode::kDomain, "cell " + std::to_string(c) + " has no observations");
    }
  }

  model.coefficients = MatrixXd::Zero(features.cols(), QuantileGridModel::kLevels);
  for (int k = 1; k < QuantileGridModel::kLevels - 1; ++k) {
    model.coefficients.col(k) = quantile_regression(features, response, QuantileGridModel::level(k));
  }
  return model;
}

}  // namespace sharpbounds
