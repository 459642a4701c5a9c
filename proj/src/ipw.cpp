#include <cmath>
#include <string>

#include "sharpbounds/applications.hpp"

namespace sharpbounds {

void IPWSample::validate() const {
  const Index n = size();
  if (n == 0) throw Error(ErrorCode::kDomain, "sample is empty");
  if (z.size() != n || x.rows() != n) {
    throw Error(ErrorCode::kDomain, "x, z and y must have the same number of rows");
  }
  for (Index i = 0; i < n; ++i) {
    if (z(i) != 0.0 && z(i) != 1.0) {
      throw Error(ErrorCode::kDomain, "z must be 0 or 1 (row " + std::to_string(i + 1) + ")");
    }
  }
  if (!x.allFinite() || !y.allFinite()) throw Error(ErrorCode::kDomain, "x and y must be finite");
}

IPWSample IPWSample::subset(std::span<const Index> rows) const {
  IPWSample out;
  const auto n = static_cast<Index>(rows.size());
  out.x.resize(n, x.cols());
  out.z.resize(n);
  out.y.resize(n);
  for (Index k = 0; k < n; ++k) {
    const Index i = rows[static_cast<size_t>(k)];
    out.x.row(k) = x.row(i);
    out.z(k) = z(i);
    out.y(k) = y(i);
  }
  return out;
}

OddsRatio c_dependence_band(double e_hat, double c) {
  if (!(c >= 0.0)) throw Error(ErrorCode::kDomain, "c must be nonnegative");
  if (!(e_hat > 0.0 && e_hat < 1.0)) {
    throw Error(ErrorCode::kPropensityRange, "propensity must lie in (0, 1)");
  }
  const double odds = e_hat / (1.0 - e_hat);
  OddsRatio out;
  out.l = e_hat <= c ? 0.0 : ((e_hat - c) / (1.0 - e_hat + c)) / odds;
  out.u = e_hat + c >= 1.0 ? kInf : ((e_hat + c) / (1.0 - e_hat - c)) / odds;
  return out;
}

OddsRatio IPWConfig::arm_odds(double e_hat, int arm) const {
  const std::optional<OddsRatio>& fixed = arm == 1 ? treated : control;
  if (fixed) return *fixed;
  return c_dependence_band(e_hat, c);
}

const char* to_string(IPWEstimand estimand) {
  switch (estimand) {
    case IPWEstimand::kAte: return "ate";
    case IPWEstimand::kTreatedMean: return "treated-mean";
    case IPWEstimand::kControlMean: return "control-mean";
  }
  return "unknown";
}

std::pair<double, double> ipw_arm_band(double e_hat, const OddsRatio& odds, int arm) {
  if (!(odds.l >= 0.0 && odds.l <= 1.0 && odds.u >= 1.0)) {
    throw Error(ErrorCode::kInvalidBand, "odds-ratio limits must satisfy 0 <= l <= 1 <= u");
  }
  if (arm == 1) {
    const double lower = std::isinf(odds.u) ? e_hat : e_hat + (1.0 - e_hat) / odds.u;
    const double upper = odds.l == 0.0 ? kInf : e_hat + (1.0 - e_hat) / odds.l;
    return {lower, upper};
  }
  const double lower = 1.0 - e_hat + e_hat * odds.l;
  const double upper = std::isinf(odds.u) ? kInf : 1.0 - e_hat + e_hat * odds.u;
  return {lower, upper};
}

VectorXd ipw_lambda(const VectorXd& e_hat, const VectorXd& z, IPWEstimand estimand) {
  const Eigen::ArrayXd e = e_hat.array();
  const Eigen::ArrayXd t = z.array();
  switch (estimand) {
    case IPWEstimand::kTreatedMean: return (t / e).matrix();
    case IPWEstimand::kControlMean: return ((1.0 - t) / (1.0 - e)).matrix();
    case IPWEstimand::kAte: break;
  }
  return (t / e - (1.0 - t) / (1.0 - e)).matrix();
}

SensitivityBand ipw_band(const VectorXd& e_hat, const VectorXd& z, const IPWConfig& config,
                         IPWEstimand estimand) {
  const Index n = e_hat.size();
  SensitivityBand band = SensitivityBand::identity(n);
  for (Index i = 0; i < n; ++i) {
    const int arm = z(i) == 1.0 ? 1 : 0;
    if ((estimand == IPWEstimand::kTreatedMean && arm == 0) ||
        (estimand == IPWEstimand::kControlMean && arm == 1)) {
      continue;
    }
    const auto [lower, upper] = ipw_arm_band(e_hat(i), config.arm_odds(e_hat(i), arm), arm);
    band.lower(i) = lower;
    band.upper(i) = upper;
  }
  return band;
}

MatrixXd ipw_quantile_features(const MatrixXd& x, const VectorXd& z, const VectorXd& e_hat) {
  const Index n = x.rows();
  const Index k = x.cols() + 2;
  MatrixXd features = MatrixXd::Zero(n, 2 * k);
  for (Index i = 0; i < n; ++i) {
    const bool treated = z(i) == 1.0;
    const Index offset = treated ? 0 : k;
    features(i, offset) = 1.0;
    features.block(i, offset + 1, 1, x.cols()) = x.row(i);
    features(i, offset + k - 1) = treated ? 1.0 / e_hat(i) : 1.0 / (1.0 - e_hat(i));
  }
  return features;
}

std::vector<Index> ipw_cells(const VectorXd& z) {
  std::vector<Index> cells(static_cast<size_t>(z.size()));
  for (Index i = 0; i < z.size(); ++i) cells[static_cast<size_t>(i)] = z(i) == 1.0 ? 1 : 0;
  return cells;
}

IPWNuisance fit_ipw_nuisance(const IPWSample& sample, IPWEstimand estimand) {
  sample.validate();
  IPWNuisance out;
  out.estimand = estimand;
  out.propensity = fit_logistic(sample.x, sample.z);
  const VectorXd e_hat = out.propensity.predict(sample.x);
  const VectorXd response = ipw_lambda(e_hat, sample.z, estimand).cwiseProduct(sample.y);
  const std::vector<Index> cells = ipw_cells(sample.z);
  out.grid = fit_quantile_grid(ipw_quantile_features(sample.x, sample.z, e_hat), response, cells,
                               "arm x [1, X, 1/e_Z(X)]");
  return out;
}

BoundPair ipw_bounds(const IPWSample& sample, const VectorXd& e_hat, const GridPredictions& sorted_grid,
                     const IPWConfig& config, IPWEstimand estimand) {
  if (e_hat.size() != sample.size()) throw Error(ErrorCode::kDomain, "one propensity per row");
  if ((e_hat.array() <= 0.0).any() || (e_hat.array() >= 1.0).any()) {
    throw Error(ErrorCode::kPropensityRange, "estimated propensities must lie in (0, 1)");
  }
  return plugin_bounds(ipw_lambda(e_hat, sample.z, estimand), sample.y,
                       ipw_band(e_hat, sample.z, config, estimand), sorted_grid, config.support);
}

namespace {

BoundPair bounds_with_nuisance(const IPWSample& sample, const IPWNuisance& nuisance,
                               const IPWConfig& config, IPWEstimand estimand) {
  if (nuisance.estimand != estimand) {
    throw Error(ErrorCode::kDomain, "quantile grid was fit for a different estimand");
  }
  const VectorXd e_hat = nuisance.propensity.predict(sample.x);
  const std::vector<Index> cells = ipw_cells(sample.z);
  const GridPredictions grid =
      nuisance.grid.predict_sorted(ipw_quantile_features(sample.x, sample.z, e_hat), cells);
  return ipw_bounds(sample, e_hat, grid, config, estimand);
}

}  // namespace

BoundPair ipw_apo_bounds(const IPWSample& sample, const IPWNuisance& nuisance,
                         const IPWConfig& config, int arm) {
  return bounds_with_nuisance(sample, nuisance, config,
                              arm == 1 ? IPWEstimand::kTreatedMean : IPWEstimand::kControlMean);
}

BoundPair ipw_ate_bounds(const IPWSample& sample, const IPWNuisance& nuisance,
                         const IPWConfig& config) {
  return bounds_with_nuisance(sample, nuisance, config, IPWEstimand::kAte);
}

}  // namespace sharpbounds
