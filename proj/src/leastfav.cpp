#include "klfls/leastfav.hpp"

#include <nlohmann/json.hpp>

#include "klfls/error.hpp"
#include "klfls/risk.hpp"

namespace klfls {

namespace {

// Structured products with the stacked companion matrix A~ (A in the top
// block row, identity shift below) keep the backward recursion and the
// Lyapunov iteration at O(a^2 (n+m)) per step instead of O(a^3).

// A~ * X
Mat shiftA_mul(const Mat& A, int n, const Mat& X) {
  Mat r(X.rows(), X.cols());
  r.topRows(n) = A * X.topRows(n);
  r.bottomRows(X.rows() - n) = X.topRows(X.rows() - n);
  return r;
}

// A~^T * X
Mat shiftAT_mul(const Mat& A, int n, const Mat& X) {
  const int a = static_cast<int>(X.rows());
  Mat r = Mat::Zero(a, X.cols());
  r.topRows(n) = A.transpose() * X.topRows(n);
  r.topRows(a - n) += X.bottomRows(a - n);
  return r;
}

// X * A~  ( = (A~^T X^T)^T )
Mat mul_shiftA(const Mat& X, const Mat& A, int n) {
  const int a = static_cast<int>(X.cols());
  Mat r = Mat::Zero(X.rows(), a);
  r.leftCols(n) = X.leftCols(n) * A;
  r.leftCols(a - n) += X.rightCols(a - n);
  return r;
}

}  // namespace

Mat LeastFavorableModel::Abar(int t) const {
  const int a = dim(), n = aug.base.n;
  Mat Bg = -gains[t] * aug.D_aug;
  Bg.topRows(n) += aug.base.B;
  Mat m = Mat::Zero(2 * a, 2 * a);
  m.topLeftCorner(a, a) = aug.A_aug;
  m.topRightCorner(a, a) = aug.B_aug * S[t];
  m.bottomRightCorner(a, a) =
      aug.A_aug - gains[t] * aug.C_aug + Bg * S[t];
  return m;
}

Mat LeastFavorableModel::Bbar(int t) const {
  const int a = dim(), n = aug.base.n;
  Mat Bg = -gains[t] * aug.D_aug;
  Bg.topRows(n) += aug.base.B;
  Mat m(2 * a, aug.base.m + n);
  m.topRows(a) = aug.B_aug * Lfact[t];
  m.bottomRows(a) = Bg * Lfact[t];
  return m;
}

Mat LeastFavorableModel::Cbar(int t) const {
  const int a = dim();
  Mat m(aug.base.m, 2 * a);
  m.leftCols(a) = aug.C_aug;
  m.rightCols(a) = aug.D_aug * S[t];
  return m;
}

Mat LeastFavorableModel::Dbar(int t) const { return aug.D_aug * Lfact[t]; }

LeastFavorableModel backward_recursion(const AugmentedModel& aug,
                                       const std::vector<Mat>& gains,
                                       const std::vector<double>& thetas) {
  if (gains.size() != thetas.size() || gains.empty())
    fail(ErrorCode::DimensionMismatch,
         "backward_recursion: gain and theta schedules must match");
  const int N = static_cast<int>(gains.size()) - 1;
  const int a = aug.dim();
  const int n = aug.base.n, m = aug.base.m, w = m + n;
  const Mat& A = aug.base.A;
  const Mat& C = aug.base.C;

  LeastFavorableModel lf;
  lf.aug = aug;
  lf.gains = gains;
  lf.thetas = thetas;
  lf.S.resize(N + 1);
  lf.Lfact.resize(N + 1);
  lf.horizon = N;

  Mat omega_inv = Mat::Zero(a, a);
  for (int t = N; t >= 0; --t) {
    Mat winv = omega_inv;
    winv.bottomRightCorner(n, n) += thetas[t] * Mat::Identity(n, n);

    Mat Bg = -gains[t] * aug.D_aug;
    Bg.topRows(n) += aug.base.B;

    Mat X = winv * Bg;  // a x w
    Mat inner = sym(Mat::Identity(w, w) - Bg.transpose() * X);
    Eigen::LLT<Mat> llt_inner(inner);
    if (llt_inner.info() != Eigen::Success)
      fail(ErrorCode::DistortionSingular,
           "backward_recursion: I - (B-GD)^T W^{-1} (B-GD) is not PD");
    Mat K = llt_inner.solve(Mat::Identity(w, w));  // K~_{v_t}

    // S~_t = K (B-GD)^T W^{-1} (A~ - G C~), with X^T (A~ - G C~) expanded
    // through the shift structure.
    Mat XtAg = mul_shiftA(X.transpose(), A, n);
    XtAg.leftCols(n) -= (X.transpose() * gains[t]) * C;
    lf.S[t] = K * XtAg;

    Eigen::LLT<Mat> lltK((K + K.transpose()) * 0.5);
    if (lltK.info() != Eigen::Success)
      fail(ErrorCode::DistortionSingular,
           "backward_recursion: distorted noise covariance is not PD");
    lf.Lfact[t] = lltK.matrixL();

    // Omega~_t^{-1} = (A~-GC~)^T W^{-1} (A~-GC~) + S~^T K~^{-1} S~.
    Mat Z = mul_shiftA(winv, A, n);
    Z.leftCols(n) -= (winv * gains[t]) * C;
    Mat AgtZ = shiftAT_mul(A, n, Z);
    AgtZ.topRows(n) -= C.transpose() * (gains[t].transpose() * Z);
    omega_inv = sym(AgtZ + lf.S[t].transpose() * inner * lf.S[t]);
  }
  return lf;
}

namespace {

LfSimulation simulate_impl(const LeastFavorableModel& lf, std::uint64_t seed,
                           LfInit init, bool reduced) {
  const AugmentedModel& aug = lf.aug;
  const int a = aug.dim(), n = aug.base.n, m = aug.base.m, w = m + n;
  Rng rng(seed);

  Vec xi0_mean = augmented_initial_mean(aug.base, aug.lag);
  Vec xi = Vec::Zero(a);
  if (init == LfInit::RandomPrior) {
    Mat V0 = augmented_initial_cov(aug.base, aug.lag);
    Eigen::LLT<Mat> llt(V0);
    Vec z(a);
    for (int i = 0; i < a; ++i) z(i) = rng.gaussian();
    xi = xi0_mean + llt.matrixL() * z;
  }
  Vec e = xi - xi0_mean;
  Vec x = xi.head(n);

  LfSimulation sim;
  for (int t = 0; t <= lf.horizon; ++t) {
    Vec eps(w);
    for (int i = 0; i < w; ++i) eps(i) = rng.gaussian();
    Vec v = lf.S[t] * e + lf.Lfact[t] * eps;  // distorted noise

    sim.x.push_back(reduced ? x : xi.head(n));
    sim.e_aux.push_back(e);
    sim.y.push_back(aug.base.C * (reduced ? x : xi.head(n)) + aug.base.D * v);

    // e~_{t+1} = (A~ - G C~ + (B-GD) S~) e~ + (B-GD) L eps
    Vec ge = lf.gains[t] * (aug.base.C * e.head(n));
    Vec Bgv = -lf.gains[t] * (aug.base.D * v);
    Bgv.head(n) += aug.base.B * v;
    Vec e_next = shiftA_mul(aug.base.A, n, e) - ge + Bgv;

    if (reduced) {
      x = aug.base.A * x + aug.base.B * v;
    } else {
      Vec xi_next = shiftA_mul(aug.base.A, n, xi);
      xi_next.head(n) += aug.base.B * v;
      xi = xi_next;
    }
    e = e_next;
  }
  return sim;
}

}  // namespace

LfSimulation lf_simulate(const LeastFavorableModel& lf, std::uint64_t seed,
                         LfInit init) {
  return simulate_impl(lf, seed, init, false);
}

LfSimulation ReducedLfModel::simulate(std::uint64_t seed, LfInit init) const {
  return simulate_impl(*lf, seed, init, true);
}

ReducedLfModel lf_reduce(const LeastFavorableModel& lf) { return {&lf}; }

ErrorCovarianceTrace evaluate_gains(const LeastFavorableModel& lf,
                                    const GainSchedule& schedule,
                                    const EvaluateOptions& opts) {
  const AugmentedModel& aug = lf.aug;
  const int a = aug.dim(), n = aug.base.n, m = aug.base.m;
  const int w = m + n;
  if (static_cast<int>(schedule.stacked.size()) < lf.horizon + 1)
    fail(ErrorCode::DimensionMismatch,
         "evaluate_gains: schedule shorter than the LF horizon");
  const Mat& A = aug.base.A;
  const Mat& C = aug.base.C;

  Mat V0 = augmented_initial_cov(aug.base, aug.lag);
  Mat P11 = V0, P12 = V0, P22 = V0;  // ones(2,2) (x) V~_0

  ErrorCovarianceTrace trace;
  auto push_state = [&](const Mat& p11, const Mat& p12, const Mat& p22) {
    trace.pibar.push_back(p11.bottomRightCorner(n, n));
    trace.variance.push_back(trace.pibar.back().trace());
    trace.piLLm1.push_back(p11.block(a - n, a - 2 * n, n, n));
    if (opts.keep_full) {
      Mat full(2 * a, 2 * a);
      full.topLeftCorner(a, a) = p11;
      full.topRightCorner(a, a) = p12;
      full.bottomLeftCorner(a, a) = p12.transpose();
      full.bottomRightCorner(a, a) = p22;
      trace.full_Pi.push_back(full);
    }
  };
  push_state(P11, P12, P22);

  // Workspace reused across the horizon; the structured products keep the
  // whole pass at O(a^2 (n+m)) per step.
  Mat Bgp(a, w), Bg(a, w), G1(a, w), G2(a, w);
  Mat X1(a, a), X2(a, a), T(a, a), R1(a, a), R2(a, a);
  Mat CM(m, a), SM(w, a), SP(w, a);
  int t_cur = 0;

  // out = (A~ - G C~ [+ Bx S~]) * M
  auto apply_f = [&](const Mat& M, const Mat& G, const Mat* Bx, Mat& out) {
    out.topRows(n).noalias() = A * M.topRows(n);
    out.bottomRows(a - n) = M.topRows(a - n);
    CM.noalias() = C * M.topRows(n);
    out.noalias() -= G * CM;
    if (Bx) {
      SM.noalias() = lf.S[t_cur] * M;
      out.noalias() += (*Bx) * SM;
    }
  };

  for (t_cur = 0; t_cur <= lf.horizon; ++t_cur) {
    const int t = t_cur;
    const Mat& Gp = schedule.stacked[t];
    Bgp.noalias() = -Gp * aug.D_aug;
    Bgp.topRows(n) += aug.base.B;
    Bg.noalias() = -lf.gains[t] * aug.D_aug;
    Bg.topRows(n) += aug.base.B;

    SP.noalias() = lf.S[t] * P22;
    trace.rtilde.push_back(sym(SP * lf.S[t].transpose() + lf.K_v(t)));

    G1.noalias() = Bgp * lf.Lfact[t];
    G2.noalias() = Bg * lf.Lfact[t];

    // X1 = F11 P11 + F12 P12^T,  X2 = F11 P12 + F12 P22, with
    // F11 = A~ - G' C~, F12 = (B~ - G' D~) S~,
    // F22 = A~ - G C~ + (B~ - G D~) S~.
    apply_f(P11, Gp, nullptr, X1);
    SM.noalias() = lf.S[t] * P12.transpose();
    X1.noalias() += Bgp * SM;

    apply_f(P12, Gp, nullptr, X2);
    X2.noalias() += Bgp * SP;

    // P11' = (F11 X1^T + F12 X2^T)^T + G1 G1^T
    T = X1.transpose();
    apply_f(T, Gp, nullptr, R1);
    SM.noalias() = lf.S[t] * X2.transpose();
    R1.noalias() += Bgp * SM;
    P11.noalias() = R1.transpose();
    P11.noalias() += G1 * G1.transpose();
    P11 = 0.5 * (P11 + P11.transpose()).eval();

    // P12' = (F22 X2^T)^T + G1 G2^T
    T = X2.transpose();
    apply_f(T, lf.gains[t], &Bg, R2);
    X2.noalias() = R2.transpose();
    X2.noalias() += G1 * G2.transpose();

    // P22' = (F22 (F22 P22)^T)^T + G2 G2^T
    apply_f(P22, lf.gains[t], &Bg, R1);
    T = R1.transpose();
    apply_f(T, lf.gains[t], &Bg, R2);
    P22.noalias() = R2.transpose();
    P22.noalias() += G2 * G2.transpose();
    P22 = 0.5 * (P22 + P22.transpose()).eval();

    P12 = X2;
    push_state(P11, P12, P22);
  }
  return trace;
}

double kl_check(const AugmentedModel& aug, const Mat& gain, const Mat& V_t,
                const Mat& P_next, double theta) {
  const int a = aug.dim(), m = aug.base.m;
  Mat S = aug.C_aug * V_t * aug.C_aug.transpose() +
          aug.D_aug * aug.D_aug.transpose();
  Mat V_next = risk_update_aug(P_next, aug.H_sel, theta);

  // Block UDL assembly of the nominal and distorted joint covariances.
  Mat U = Mat::Identity(a + m, a + m);
  U.topRightCorner(a, m) = gain;
  Mat mid = Mat::Zero(a + m, a + m);
  mid.bottomRightCorner(m, m) = S;

  mid.topLeftCorner(a, a) = P_next;
  Mat K = U * mid * U.transpose();
  mid.topLeftCorner(a, a) = V_next;
  Mat K0 = U * mid * U.transpose();

  Eigen::LLT<Mat> llt(sym(K));
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NonPDInput, "kl_check: joint covariance is not PD");
  Mat ratio = llt.solve(K0);
  double tr = ratio.trace() - (a + m);
  double ld = logdet_spd(sym(K0)) - logdet_spd(sym(K));
  return 0.5 * (tr - ld);
}

std::string lf_to_json(const LeastFavorableModel& lf) {
  nlohmann::json j;
  j["lag"] = lf.aug.lag;
  j["horizon"] = lf.horizon;
  j["base"] = nlohmann::json::parse(model_to_json(lf.aug.base));
  auto dump_mat = [](const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  nlohmann::json steps = nlohmann::json::array();
  for (int t = 0; t <= lf.horizon; ++t) {
    nlohmann::json s;
    s["t"] = t;
    s["theta"] = lf.thetas[t];
    s["S"] = dump_mat(lf.S[t]);
    s["Lfact"] = dump_mat(lf.Lfact[t]);
    s["gain"] = dump_mat(lf.gains[t]);
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  return j.dump();
}

}  // namespace klfls
