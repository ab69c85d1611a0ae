#include "klfls/arfls.hpp"

namespace klfls {

namespace {

// Mirror the lower triangle; the factorizations only read that half.
void symmetrize(Mat& a) {
  a.triangularView<Eigen::StrictlyUpper>() =
      a.triangularView<Eigen::StrictlyLower>().transpose();
}

}  // namespace

ArflsSmoother::ArflsSmoother(const AugmentedModel& aug, const KLBudget& budget,
                             double filler)
    : aug_(aug), budget_(budget) {
  const int a = aug.dim();
  const int m = aug.base.m;
  BBt_ = aug.B_aug * aug.B_aug.transpose();
  DDt_ = aug.D_aug * aug.D_aug.transpose();
  xi_ = augmented_initial_mean(aug.base, aug.lag);
  V_ = augmented_initial_cov(aug.base, aug.lag, filler);
  P_ = V_;
  Ct_ = aug.C_aug.transpose();
  Ia_ = Mat::Identity(a, a);
  AV_.resize(a, a);
  Pinv_.resize(a, a);
  VC_.resize(a, m);
  Graw_.resize(a, m);
  Gt_.resize(m, a);
  SGt_.resize(m, a);
  S_.resize(m, m);
  xi_next_.resize(a);
  innov_.resize(m);
}

ArflsSmoother::StepResult ArflsSmoother::step(const Vec& y,
                                              const Vec* w_stacked) {
  const Mat& A = aug_.A_aug;
  const Mat& C = aug_.C_aug;
  const int n = aug_.base.n;
  const double c = budget_.at(t_);

  VC_.noalias() = V_ * Ct_;
  S_.noalias() = C * VC_;
  S_ += DDt_;
  AV_.noalias() = A * V_;
  Graw_.noalias() = AV_ * Ct_;
  if (S_.rows() == 1) {
    if (S_(0, 0) <= 0.0)
      fail(ErrorCode::NonPDInput, "arfls: innovation covariance is not PD");
    G_ = Graw_ / S_(0, 0);
    Gt_ = G_.transpose();
  } else {
    llt_small_.compute(S_);
    if (llt_small_.info() != Eigen::Success)
      fail(ErrorCode::NonPDInput, "arfls: innovation covariance is not PD");
    Gt_.noalias() = llt_small_.solve(Graw_.transpose());
    G_ = Gt_.transpose();
  }

  innov_ = y;
  innov_.noalias() -= C * xi_;
  xi_next_.noalias() = A * xi_;
  xi_next_.noalias() += G_ * innov_;
  if (w_stacked) xi_next_ += *w_stacked;
  xi_.swap(xi_next_);

  P_.noalias() = AV_ * A.transpose();
  SGt_.noalias() = S_ * Gt_;
  P_.noalias() -= G_ * SGt_;
  P_ += BBt_;

  double theta = solve_theta(P_.bottomRightCorner(n, n), c).theta;

  if (theta == 0.0) {
    V_ = P_;
  } else {
    // Algorithm step as written: invert, distort, invert back, with the
    // general-purpose dense inverse of the plain transliteration.
    symmetrize(P_);
    lu_big_.compute(P_);
    Pinv_.noalias() = lu_big_.inverse();
    Pinv_.bottomRightCorner(n, n).diagonal().array() -= theta;
    symmetrize(Pinv_);
    lu_big_.compute(Pinv_);
    V_.noalias() = lu_big_.inverse();
    symmetrize(V_);
    if (!V_.allFinite())
      fail(ErrorCode::ThetaOutOfRange, "arfls: distorted covariance is singular");
  }
  if (monitor_) monitor_->record(V_, P_);
  ++t_;
  return {xi_.tail(n), theta};  // H~ selects the trailing block
}

ArflsResult arfls_run(const StateSpaceModel& model, const std::vector<Vec>& Y,
                      int L, const KLBudget& budget, const std::vector<Vec>* u,
                      const ArflsOptions& opts) {
  const int N = static_cast<int>(Y.size()) - 1;
  if (N + 1 < L)
    fail(ErrorCode::InsufficientData, "arfls_run: need at least L observations");
  AugmentedModel aug = build_augmented(model, L);
  ArflsSmoother sm(aug, budget, opts.filler);
  sm.attach_monitor(opts.monitor);

  ArflsResult res;
  for (int t = 0; t <= N; ++t) {
    Vec w;
    const Vec* wp = nullptr;
    if (u) {
      w = Vec::Zero(aug.dim());
      w.head(model.n) = (*u)[t];
      wp = &w;
    }
    if (opts.record_covariances) res.V_trace.push_back(sm.V_aug());  // V~_t
    auto st = sm.step(Y[t], wp);
    res.out.innovation_trace.push_back(sm.innovation());
    res.out.predictor_trace.push_back(sm.xi_pred().head(model.n));
    res.thetas.push_back(st.theta);
    res.gains.push_back(sm.gain());
    if (opts.record_covariances) res.P_trace.push_back(sm.P_next());  // P~_{t+1}
    if (t >= L - 1) res.out.estimates.push_back({t, st.estimate});
  }
  return res;
}

GainThetaSchedule arfls_schedule(const AugmentedModel& aug,
                                 const KLBudget& budget, int N) {
  ArflsSmoother sm(aug, budget);
  GainThetaSchedule sched;
  Vec y0 = Vec::Zero(aug.base.m);
  for (int t = 0; t <= N; ++t) {
    auto st = sm.step(y0);
    sched.gains.push_back(sm.gain());
    sched.thetas.push_back(st.theta);
  }
  return sched;
}

}  // namespace klfls
