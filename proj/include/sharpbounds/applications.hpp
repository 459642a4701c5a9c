#pragma once

// Adapters from regression discontinuity, inverse propensity weighting and
// OLS to BoundProblem instances, plus the plug-in evaluation that turns a
// fitted quantile grid into per-observation balancing quantiles.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "sharpbounds/core_bounds.hpp"
#include "sharpbounds/nuisance.hpp"

namespace sharpbounds {

// ---------------------------------------------------------------------------
// Plug-in bounds with model-based quantiles.

// Whether lambda*Y may be unbounded given R. With unbounded support an
// infinite cap and w_lower < 1 make the bound infinite; with bounded support
// the grid's extreme levels stand in for the conditional supremum/infimum.
enum class OutcomeSupport { kUnbounded, kBounded };

/// Per-observation quantile of lambda*Y at the balancing level for
/// `direction`, read from rows of rearranged grid predictions (n x 101).
VectorXd plugin_quantiles(const SensitivityBand& band, const GridPredictions& sorted_grid,
                          Direction direction, OutcomeSupport support);

/// Both plug-in bounds with every observation its own conditioning cell.
BoundPair plugin_bounds(const VectorXd& lambda, const VectorXd& outcome,
                        const SensitivityBand& band, const GridPredictions& sorted_grid,
                        OutcomeSupport support = OutcomeSupport::kUnbounded);

// ---------------------------------------------------------------------------
// Inverse propensity weighting.

struct IPWSample {
  MatrixXd x;  // covariates, no intercept column
  VectorXd z;  // 0/1 treatment
  VectorXd y;

  Index size() const { return y.size(); }
  void validate() const;
  IPWSample subset(std::span<const Index> rows) const;
};

struct OddsRatio {
  double l = 1.0;  // may be 0
  double u = 1.0;  // may be +inf
};

/// Odds-ratio limits implied by c-dependence, e_z in [e - c, e + c] ∩ [0, 1].
/// l hits 0 once e <= c and u becomes +inf once e + c >= 1.
OddsRatio c_dependence_band(double e_hat, double c);

struct IPWConfig {
  // c-dependence radius; ignored when explicit odds-ratio bands are given.
  double c = 0.0;
  std::optional<OddsRatio> treated;
  std::optional<OddsRatio> control;
  OutcomeSupport support = OutcomeSupport::kUnbounded;

  OddsRatio arm_odds(double e_hat, int arm) const;
};

enum class IPWEstimand { kAte, kTreatedMean, kControlMean };

const char* to_string(IPWEstimand estimand);

/// Weight band for an arm at propensity e: treated [e + (1-e)/u, e + (1-e)/l],
/// control [1 - e + e l, 1 - e + e u].
std::pair<double, double> ipw_arm_band(double e_hat, const OddsRatio& odds, int arm);

/// lambda(R) for the estimand: Z/e, (1-Z)/(1-e), or their difference.
VectorXd ipw_lambda(const VectorXd& e_hat, const VectorXd& z, IPWEstimand estimand);

/// Band for the estimand. Rows outside the estimand's arm get [1, 1].
SensitivityBand ipw_band(const VectorXd& e_hat, const VectorXd& z, const IPWConfig& config,
                         IPWEstimand estimand);

/// Quantile-grid design: [1, X, 1/e_Z(X)] interacted with each arm, where
/// 1/e_Z is 1/e for treated and 1/(1-e) for control rows.
MatrixXd ipw_quantile_features(const MatrixXd& x, const VectorXd& z, const VectorXd& e_hat);

std::vector<Index> ipw_cells(const VectorXd& z);

struct IPWNuisance {
  PropensityModel propensity;
  QuantileGridModel grid;
  IPWEstimand estimand = IPWEstimand::kAte;
};

/// Logistic propensity on X and the quantile grid of lambda-hat * Y.
IPWNuisance fit_ipw_nuisance(const IPWSample& sample, IPWEstimand estimand);

/// Plug-in bounds at given propensities and grid predictions. Throws
/// kPropensityRange unless every e_hat lies in (0, 1).
BoundPair ipw_bounds(const IPWSample& sample, const VectorXd& e_hat, const GridPredictions& sorted_grid,
                     const IPWConfig& config, IPWEstimand estimand);

BoundPair ipw_apo_bounds(const IPWSample& sample, const IPWNuisance& nuisance,
                         const IPWConfig& config, int arm);
BoundPair ipw_ate_bounds(const IPWSample& sample, const IPWNuisance& nuisance,
                         const IPWConfig& config);

// ---------------------------------------------------------------------------
// Regression discontinuity with one-sided manipulation.

struct RDSample {
  VectorXd x;  // running variable
  VectorXd y;

  Index size() const { return y.size(); }
  RDSample subset(std::span<const Index> rows) const;
};

struct RDConfig {
  double cutoff = 0.0;
  double bandwidth = 1.0;
  double lambda1_minus = 1.0;
  double lambda1_plus = 1.0;
  double lambda0_minus = 1.0;
  double lambda0_plus = 1.0;
  std::optional<double> tau_input;

  void validate() const;
};

struct RDEstimates {
  double tau = 0.0;
  double tau0 = 0.0;
  double mean_above = 0.0;
  double mean_below = 0.0;
  double p_above = 0.0;
  double p_below = 0.0;
  Index n_above = 0;
  Index n_below = 0;
};

inline double tau0_from_tau(double tau) { return tau / (2.0 - tau); }
inline double tau_from_tau0(double tau0) { return 2.0 * tau0 / (1.0 + tau0); }

/// max(0, 1 - N-/N+) over the windows [c-h, c) and (c, c+h], kept below 1.
double rd_estimate_tau(const RDSample& sample, double cutoff, double bandwidth);

RDEstimates rd_estimates(const RDSample& sample, const RDConfig& config);

enum class RDEstimand { kClate, kCatt, kCate };

const char* to_string(RDEstimand estimand);

/// Bounds on the estimand itself: the point-identified terms are already
/// added, diagnostics come from the underlying bound problem.
BoundPair rd_clate_bounds(const RDSample& sample, const RDConfig& config);
BoundPair rd_catt_bounds(const RDSample& sample, const RDConfig& config);
BoundPair rd_cate_bounds(const RDSample& sample, const RDConfig& config);
BoundPair rd_bounds(const RDSample& sample, const RDConfig& config, RDEstimand estimand);

// ---------------------------------------------------------------------------
// OLS contrasts.

struct OLSConfig {
  VectorXd delta;  // contrast on the coefficients; first (intercept) entry must be 0
  double w_lower = 1.0;
  double w_upper = 1.0;
  std::vector<Index> group;  // optional conditioning cells
};

/// lambda_i = delta' (X'X/n)^{-1} X_i. X includes the intercept column.
VectorXd ols_lambda(const MatrixXd& x, const VectorXd& delta);

BoundPair ols_bounds(const VectorXd& y, const MatrixXd& x, const OLSConfig& config);

}  // namespace sharpbounds
