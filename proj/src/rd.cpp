#include <algorithm>
#include <cmath>
#include <string>

#include "sharpbounds/applications.hpp"

namespace sharpbounds {

namespace {

constexpr Index kBelow = 0;
constexpr Index kAbove = 1;

// Window rows with their side: [c - h, c) is below, (c, c + h] above.
struct Window {
  std::vector<Index> rows;
  std::vector<Index> side;
};

Window window_of(const RDSample& sample, double cutoff, double bandwidth) {
  Window w;
  for (Index i = 0; i < sample.size(); ++i) {
    const double x = sample.x(i);
    if (x > cutoff && x <= cutoff + bandwidth) {
      w.rows.push_back(i);
      w.side.push_back(kAbove);
    } else if (x < cutoff && x >= cutoff - bandwidth) {
      w.rows.push_back(i);
      w.side.push_back(kBelow);
    }
  }
  return w;
}

void check_side_band(double lo, double hi, const char* name) {
  if (!(lo >= 0.0 && lo <= 1.0 && hi >= 1.0)) {
    throw Error(ErrorCode::kInvalidBand, std::string(name) + " must satisfy 0 <= minus <= 1 <= plus");
  }
}

// One bound problem over the window with side cells; lambda and band are
// given per side.
BoundPair side_problem_bounds(const RDSample& sample, const Window& w, const double lambda[2],
                              const std::pair<double, double> band[2]) {
  const auto n = static_cast<Index>(w.rows.size());
  BoundProblem problem;
  problem.lambda.resize(n);
  problem.outcome.resize(n);
  problem.band.lower.resize(n);
  problem.band.upper.resize(n);
  problem.group = w.side;
  for (Index k = 0; k < n; ++k) {
    const Index s = w.side[static_cast<size_t>(k)];
    problem.lambda(k) = lambda[s];
    problem.outcome(k) = sample.y(w.rows[static_cast<size_t>(k)]);
    problem.band.lower(k) = band[s].first;
    problem.band.upper(k) = band[s].second;
  }
  BoundPair out;
  problem.direction = Direction::kLower;
  out.lower = sharp_bound_exact(problem);
  problem.direction = Direction::kUpper;
  out.upper = sharp_bound_exact(problem);
  return out;
}

BoundPair shifted(BoundPair pair, double offset) {
  pair.lower.value += offset;
  pair.upper.value += offset;
  pair.lower.finite = std::isfinite(pair.lower.value);
  pair.upper.finite = std::isfinite(pair.upper.value);
  return pair;
}

}  // namespace

RDSample RDSample::subset(std::span<const Index> rows) const {
  RDSample out;
  out.x.resize(static_cast<Index>(rows.size()));
  out.y.resize(static_cast<Index>(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k) {
    out.x(static_cast<Index>(k)) = x(rows[k]);
    out.y(static_cast<Index>(k)) = y(rows[k]);
  }
  return out;
}

void RDConfig::validate() const {
  if (!(bandwidth > 0.0)) throw Error(ErrorCode::kConfig, "bandwidth must be positive");
  check_side_band(lambda1_minus, lambda1_plus, "Lambda1");
  check_side_band(lambda0_minus, lambda0_plus, "Lambda0");
  if (tau_input && !(*tau_input >= 0.0 && *tau_input < 1.0)) {
    throw Error(ErrorCode::kConfig, "tau must lie in [0, 1)");
  }
}

const char* to_string(RDEstimand estimand) {
  switch (estimand) {
    case RDEstimand::kClate: return "clate";
    case RDEstimand::kCatt: return "catt";
    case RDEstimand::kCate: return "cate";
  }
  return "unknown";
}

double rd_estimate_tau(const RDSample& sample, double cutoff, double bandwidth) {
  const Window w = window_of(sample, cutoff, bandwidth);
  double above = 0.0, below = 0.0;
  for (Index s : w.side) (s == kAbove ? above : below) += 1.0;
  if (above == 0.0) throw Error(ErrorCode::kEmptySide, "no observations just above the cutoff");
  const double tau = std::max(0.0, 1.0 - below / above);
  return std::min(tau, std::nextafter(1.0, 0.0));
}

RDEstimates rd_estimates(const RDSample& sample, const RDConfig& config) {
  config.validate();
  if (sample.x.size() != sample.y.size()) {
    throw Error(ErrorCode::kDomain, "x and y differ in length");
  }
  const Window w = window_of(sample, config.cutoff, config.bandwidth);
  RDEstimates est;
  double sum_above = 0.0, sum_below = 0.0;
  for (size_t k = 0; k < w.rows.size(); ++k) {
    const double y = sample.y(w.rows[k]);
    if (w.side[k] == kAbove) {
      ++est.n_above;
      sum_above += y;
    } else {
      ++est.n_below;
      sum_below += y;
    }
  }
  if (est.n_above == 0) throw Error(ErrorCode::kEmptySide, "no observations just above the cutoff");
  if (est.n_below == 0) throw Error(ErrorCode::kEmptySide, "no observations just below the cutoff");
  const double n = static_cast<double>(est.n_above + est.n_below);
  est.mean_above = sum_above / static_cast<double>(est.n_above);
  est.mean_below = sum_below / static_cast<double>(est.n_below);
  est.p_above = static_cast<double>(est.n_above) / n;
  est.p_below = static_cast<double>(est.n_below) / n;
  est.tau = config.tau_input ? *config.tau_input
                             : rd_estimate_tau(sample, config.cutoff, config.bandwidth);
  est.tau0 = tau0_from_tau(est.tau);
  return est;
}

BoundPair rd_clate_bounds(const RDSample& sample, const RDConfig& config) {
  const RDEstimates est = rd_estimates(sample, config);
  const Window w = window_of(sample, config.cutoff, config.bandwidth);
  const double t = est.tau;
  const double lambda[2] = {0.0, 1.0 / est.p_above};
  const std::pair<double, double> band[2] = {
      {1.0, 1.0},
      {1.0 / (1.0 - t + t * config.lambda1_plus), 1.0 / (1.0 - t + t * config.lambda1_minus)}};
  // E_true[Y(1) | M = 0] - E[Y | c-].
  return shifted(side_problem_bounds(sample, w, lambda, band), -est.mean_below);
}

BoundPair rd_catt_bounds(const RDSample& sample, const RDConfig& config) {
  const RDEstimates est = rd_estimates(sample, config);
  const Window w = window_of(sample, config.cutoff, config.bandwidth);
  const double lambda[2] = {1.0 / est.p_below, 0.0};
  const std::pair<double, double> band[2] = {{config.lambda0_minus, config.lambda0_plus},
                                             {1.0, 1.0}};
  // (E[(2D - 1) Y] - tau0 E_true[Y(0) | M = 1]) / E[D], with the side shares
  // implied by tau0: P(c+) = (1 + tau0)/2.
  const double t0 = est.tau0;
  const double p_above = (1.0 + t0) / 2.0;
  const double p_below = (1.0 - t0) / 2.0;
  const BoundPair y0 = side_problem_bounds(sample, w, lambda, band);
  const double observed = p_above * est.mean_above - p_below * est.mean_below;
  BoundPair out;
  out.lower = y0.upper;
  out.upper = y0.lower;
  out.lower.direction = Direction::kLower;
  out.upper.direction = Direction::kUpper;
  out.lower.value = (observed - t0 * y0.upper.value) / p_above;
  out.upper.value = (observed - t0 * y0.lower.value) / p_above;
  if (t0 == 0.0) out.lower.value = out.upper.value = observed / p_above;
  out.lower.finite = std::isfinite(out.lower.value);
  out.upper.finite = std::isfinite(out.upper.value);
  return out;
}

BoundPair rd_cate_bounds(const RDSample& sample, const RDConfig& config) {
  const RDEstimates est = rd_estimates(sample, config);
  if (est.tau >= 0.5) {
    throw Error(ErrorCode::kUndefinedEstimand, "the CATE needs tau < 1/2");
  }
  const Window w = window_of(sample, config.cutoff, config.bandwidth);
  const double t = est.tau;
  const double t0 = est.tau0;
  // E[Y | c+]/(2 - tau) + (1 - tau)/(2 - tau) E_true[Y(1) | M = 0]
  //   - tau0 E_true[Y(0) | M = 1] - (1 - tau0) E[Y | c-].
  // The two unobserved means form one joint problem with side cells.
  const double lambda[2] = {-t0 / est.p_below, (1.0 - t) / (2.0 - t) / est.p_above};
  const std::pair<double, double> band[2] = {
      {config.lambda0_minus, config.lambda0_plus},
      {1.0 / (1.0 - t + t * config.lambda1_plus), 1.0 / (1.0 - t + t * config.lambda1_minus)}};
  const double observed = est.mean_above / (2.0 - t) - (1.0 - t0) * est.mean_below;
  return shifted(side_problem_bounds(sample, w, lambda, band), observed);
}

BoundPair rd_bounds(const RDSample& sample, const RDConfig& config, RDEstimand estimand) {
  switch (estimand) {
    case RDEstimand::kClate: return rd_clate_bounds(sample, config);
    case RDEstimand::kCatt: return rd_catt_bounds(sample, config);
    case RDEstimand::kCate: break;
  }
  return rd_cate_bounds(sample, config);
}

}  // namespace sharpbounds
