#include "klfls/risk.hpp"

namespace klfls {

namespace {

// gammabar through the eigenvalues of P_LL. Exact same function as
// gamma_reduced; the spectral form makes each bisection iterate O(n).
double gamma_from_eigs(const Vec& eigs, double theta) {
  if (theta == 0.0) return 0.0;
  const double tinv = 1.0 / theta;
  double acc = 0.0;
  for (int i = 0; i < eigs.size(); ++i) {
    double g = eigs(i) / (eigs(i) - tinv);  // p * Gamma^{-1} eigenvalue
    acc += g + std::log1p(-g);
  }
  return -0.5 * acc;
}

}  // namespace

double gamma_aug(const Mat& P_aug, const Mat& H_sel, double theta) {
  const int a = static_cast<int>(P_aug.rows());
  Mat PLL = H_sel * P_aug * H_sel.transpose();
  if (theta < 0.0 || (theta > 0.0 && theta * max_eig(PLL) >= 1.0))
    fail(ErrorCode::ThetaOutOfRange, "gamma_aug: theta outside (0, 1/r)");
  if (theta == 0.0) return 0.0;
  Mat M = Mat::Identity(a, a) - theta * H_sel.transpose() * (H_sel * P_aug);
  Mat Minv = M.partialPivLu().solve(Mat::Identity(a, a));
  return 0.5 * ((Minv.trace() - a) + logdet_posdet(M));
}

double gamma_reduced(const Mat& P_LL, double theta) {
  const int n = static_cast<int>(P_LL.rows());
  if (theta == 0.0) return 0.0;
  if (theta < 0.0 || theta * max_eig(P_LL) >= 1.0)
    fail(ErrorCode::ThetaOutOfRange, "gamma_reduced: theta outside (0, 1/r)");
  Mat gamma_mat = sym(P_LL) - (1.0 / theta) * Mat::Identity(n, n);
  Mat ginv = gamma_mat.partialPivLu().solve(Mat::Identity(n, n));
  double tr = (P_LL * ginv).trace();
  double ld = logdet_posdet(Mat::Identity(n, n) - P_LL * ginv);
  return -0.5 * (tr + ld);
}

ThetaSolution solve_theta(const Mat& P_LL, double c, double tol) {
  if (!(c >= 0.0)) fail(ErrorCode::InvalidArgument, "solve_theta: c must be >= 0");
  // Closed-form spectra for the common tiny blocks; the search runs every
  // smoother step, so this sits on the hot path.
  Vec eigs;
  const int nb = static_cast<int>(P_LL.rows());
  if (nb == 1) {
    eigs = P_LL.col(0);
  } else if (nb == 2) {
    const double a = P_LL(0, 0), d = P_LL(1, 1);
    const double b = 0.5 * (P_LL(0, 1) + P_LL(1, 0));
    const double mid = 0.5 * (a + d);
    const double disc = std::sqrt(std::max(0.0, 0.25 * (a - d) * (a - d) + b * b));
    eigs.resize(2);
    eigs << mid - disc, mid + disc;
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(P_LL), Eigen::EigenvaluesOnly);
    eigs = es.eigenvalues();
  }
  if (eigs(0) <= 0.0)
    fail(ErrorCode::NonPDInput, "solve_theta: P block is not positive definite");
  const double r = eigs(eigs.size() - 1);

  ThetaSolution sol;
  sol.upper_bound = 1.0 / r;
  if (c == 0.0) return sol;

  double lo = 0.0;
  double hi = (1.0 - 1e-12) / r;
  double theta = 0.5 * (lo + hi);
  double resid = gamma_from_eigs(eigs, theta) - c;
  int it = 0;
  const int max_iter = 200;
  while (std::abs(resid) > tol && (hi - lo) >= 1e-14 && it < max_iter) {
    if (resid < 0.0)
      lo = theta;
    else
      hi = theta;
    theta = 0.5 * (lo + hi);
    resid = gamma_from_eigs(eigs, theta) - c;
    ++it;
  }
  if (it >= max_iter && std::abs(resid) > tol)
    fail(ErrorCode::NoConvergence, "solve_theta: bisection iteration cap hit");
  sol.theta = theta;
  sol.gamma_residual = resid;
  sol.iterations = it;
  return sol;
}

Mat risk_update_aug(const Mat& P_aug, const Mat& H_sel, double theta) {
  if (theta == 0.0) return P_aug;
  const int n = static_cast<int>(H_sel.rows());
  Mat PLL = H_sel * P_aug * H_sel.transpose();
  if (theta < 0.0 || theta * max_eig(PLL) >= 1.0)
    fail(ErrorCode::ThetaOutOfRange, "risk_update_aug: theta outside (0, 1/r)");
  // -Gamma = theta^{-1} I - P^{L,L} is SPD; factoring it and squaring the
  // half-solve keeps the correction PSD, so V~ >= P~ holds to rounding.
  Mat neg_gamma = sym((1.0 / theta) * Mat::Identity(n, n) - PLL);
  Eigen::LLT<Mat> llt(neg_gamma);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::ThetaOutOfRange, "risk_update_aug: distortion factor not PD");
  Mat Y = llt.matrixL().solve(H_sel * P_aug);  // n x a half-solve
  return sym(P_aug + Y.transpose() * Y);
}

}  // namespace klfls
