#include <algorithm>
#include <cmath>

#include "sharpbounds/nuisance.hpp"

namespace sharpbounds {

namespace {

constexpr int kMaxIterations = 100;
constexpr double kGapTolerance = 1e-11;
constexpr double kStepFactor = 0.99995;

// Largest t in [0, 1] with v + t dv >= 0.
double max_step(const VectorXd& v, const VectorXd& dv) {
  double t = 1.0;
  for (Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) t = std::min(t, -v(i) / dv(i));
  }
  return t;
}

// Dual LP of the check-loss problem in the Koenker-d'Orey form:
//   min c'x  s.t.  A x = b, 0 <= x <= 1,
// with A = X', c = -y, b = (1 - tau) X'1. The multiplier of A x = b is -beta.
struct FrischNewton {
  const MatrixXd& design;
  VectorXd c;
  VectorXd b;

  VectorXd x{}, s{}, dual{}, z{}, w{};

  struct Step {
    VectorXd dx, dy, dz, dw;
  };

  Step solve(const VectorXd& r_b, const VectorXd& r_c, const VectorXd& r_xz,
                   const VectorXd& r_sw) const {
    const VectorXd d = ((z.array() / x.array()) + (w.array() / s.array())).inverse().matrix();
    const VectorXd r_tilde =
        (r_c.array() - r_xz.array() / x.array() + r_sw.array() / s.array()).matrix();
    const MatrixXd normal = design.transpose() * d.asDiagonal() * design;
    const VectorXd rhs = r_b + design.transpose() * d.cwiseProduct(r_tilde);
    Eigen::LDLT<MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularDesign, "quantile regression normal equations are singular");
    }
    Step dir;
    dir.dy = ldlt.solve(rhs);
    dir.dx = d.cwiseProduct(design * dir.dy - r_tilde);
    dir.dz = ((r_xz.array() - z.array() * dir.dx.array()) / x.array()).matrix();
    dir.dw = ((r_sw.array() + w.array() * dir.dx.array()) / s.array()).matrix();
    return dir;
  }
};

}  // namespace

double check_loss(const MatrixXd& design, const VectorXd& response, const VectorXd& coefficients,
                  double tau) {
  const VectorXd u = response - design * coefficients;
  double total = 0.0;
  for (Index i = 0; i < u.size(); ++i) total += u(i) * (tau - (u(i) < 0.0 ? 1.0 : 0.0));
  return total / static_cast<double>(u.size());
}

VectorXd quantile_regression(const MatrixXd& design, const VectorXd& response, double tau) {
  const Index n = design.rows();
  const Index p = design.cols();
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::kDomain, "tau must lie in (0, 1)");
  if (response.size() != n) throw Error(ErrorCode::kDomain, "design and response differ in length");
  if (n < p || p == 0) throw Error(ErrorCode::kSingularDesign, "fewer observations than features");
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  if (qr.rank() < p) throw Error(ErrorCode::kSingularDesign, "design matrix is rank deficient");

  FrischNewton fn{design, -response, (1.0 - tau) * design.transpose() * VectorXd::Ones(n)};
  fn.x = VectorXd::Constant(n, 1.0 - tau);
  fn.s = VectorXd::Constant(n, tau);
  // Least-squares start for the dual; z and w split the residual and are
  // shifted off zero so the iterate is interior.
  fn.dual = qr.solve(fn.c);
  const VectorXd r = fn.c - design * fn.dual;
  const double shift = 0.1 * r.cwiseAbs().mean() + 1e-6 * (1.0 + response.cwiseAbs().maxCoeff());
  fn.z = r.cwiseMax(0.0).array() + shift;
  fn.w = (-r).cwiseMax(0.0).array() + shift;

  const double scale = 1.0 + response.cwiseAbs().maxCoeff();
  for (int it = 0; it < kMaxIterations; ++it) {
    const double gap = fn.x.dot(fn.z) + fn.s.dot(fn.w);
    const VectorXd r_b = fn.b - design.transpose() * fn.x;
    const VectorXd r_c = fn.c - design * fn.dual - fn.z + fn.w;
    if (gap < kGapTolerance * scale * static_cast<double>(n) &&
        r_b.cwiseAbs().maxCoeff() < 1e-9 * static_cast<double>(n) &&
        r_c.cwiseAbs().maxCoeff() < 1e-9 * scale) {
      break;
    }
    const double mu = gap / static_cast<double>(2 * n);

    // Affine-scaling predictor.
    const VectorXd r_xz = -fn.x.cwiseProduct(fn.z);
    const VectorXd r_sw = -fn.s.cwiseProduct(fn.w);
    const auto aff = fn.solve(r_b, r_c, r_xz, r_sw);
    const double ap = std::min(max_step(fn.x, aff.dx), max_step(fn.s, -aff.dx));
    const double ad = std::min(max_step(fn.z, aff.dz), max_step(fn.w, aff.dw));
    const double mu_aff = ((fn.x + ap * aff.dx).dot(fn.z + ad * aff.dz) +
                           (fn.s - ap * aff.dx).dot(fn.w + ad * aff.dw)) /
                          static_cast<double>(2 * n);
    const double sigma = std::pow(mu_aff / mu, 3);

    // Mehrotra corrector.
    const VectorXd r_xz_c = (sigma * mu - fn.x.array() * fn.z.array() -
                             aff.dx.array() * aff.dz.array()).matrix();
    const VectorXd r_sw_c = (sigma * mu - fn.s.array() * fn.w.array() +
                             aff.dx.array() * aff.dw.array()).matrix();
    const auto dir = fn.solve(r_b, r_c, r_xz_c, r_sw_c);
    const double step_p =
        std::min(1.0, kStepFactor * std::min(max_step(fn.x, dir.dx), max_step(fn.s, -dir.dx)));
    const double step_d =
        std::min(1.0, kStepFactor * std::min(max_step(fn.z, dir.dz), max_step(fn.w, dir.dw)));
    fn.x += step_p * dir.dx;
    fn.s -= step_p * dir.dx;
    fn.dual += step_d * dir.dy;
    fn.z += step_d * dir.dz;
    fn.w += step_d * dir.dw;
  }
  return -fn.dual;
}

}  // namespace sharpbounds
