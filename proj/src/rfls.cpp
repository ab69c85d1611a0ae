#include "klfls/rfls.hpp"

#include <omp.h>

#include "klfls/threads.hpp"

namespace klfls {

namespace {

// Structural guard: the reduced algorithm never factors anything larger
// than max(n, m).
Mat guarded_spd_solve(const Mat& a, const Mat& b, int cap) {
  if (a.rows() > cap)
    throw std::logic_error("rfls: attempted inversion larger than max(n, m)");
  return spd_solve(a, b);
}

// dest = base + sign * Lf * Rf^T over the n x n block grid, where the
// product is symmetric. Lower-triangle blocks are computed, the mirror is
// assigned; rows of the block grid are independent, hence the parallel for.
void sym_rank_update(Mat& dest, const Mat& base, const Mat& Lf, const Mat& Rf,
                     double sign, int n, int nb) {
  const int nt = num_threads();
#pragma omp parallel for schedule(dynamic, 2) num_threads(nt) if (nt > 1 && nb >= 8)
  for (int j = 0; j < nb; ++j) {
    for (int k = 0; k <= j; ++k) {
      dest.block(j * n, k * n, n, n).noalias() =
          base.block(j * n, k * n, n, n) +
          sign * (Lf.middleRows(j * n, n) * Rf.middleRows(k * n, n).transpose());
      if (j != k)
        dest.block(k * n, j * n, n, n) =
            dest.block(j * n, k * n, n, n).transpose();
    }
  }
}

}  // namespace

RflsSmoother::RflsSmoother(const StateSpaceModel& model, int L,
                           const KLBudget& budget, double filler)
    : model_(model), budget_(budget), L_(L) {
  if (L < 1) fail(ErrorCode::InvalidLag, "rfls: lag must be >= 1");
  n_ = model.n;
  m_ = model.m;
  a_ = (L + 1) * n_;
  Ct_ = model.C.transpose();
  DDt_ = model.D * model.D.transpose();
  BBt_ = model.B * model.B.transpose();
  V_ = augmented_initial_cov(model, L, filler);
  Pf_ = Mat::Zero(a_, a_);
  Pp_ = Mat::Zero(a_, a_);
  x_pred_ = model.x0_mean;
  history_.resize(L + 1);
}

RflsSmoother::StepResult RflsSmoother::step(const Vec& y, const Vec* u) {
  const double c = budget_.at(t_);
  const int cap = std::max(n_, m_);
  const int nb = L_ + 1;

  // Filter: L_t = V C^T S^{-1} blockwise through the first block column.
  Mat V00 = V_.topLeftCorner(n_, n_);
  Mat S = model_.C * V00 * Ct_ + DDt_;
  U_ = V_.leftCols(n_) * Ct_;                                     // V^j C^T
  W_ = guarded_spd_solve(S, U_.transpose(), cap).transpose();     // L^j blocks

  Vec innov = y - model_.C * x_pred_;

  // Window summands V^p V^{-1} L_t innov feeding the combine step.
  Vec wv = guarded_spd_solve(sym(V00), W_.topRows(n_) * innov, cap);
  HistEntry& entry = ring(t_);
  entry.t = t_;
  entry.x_pred = x_pred_;
  if (entry.summands.rows() != n_ || entry.summands.cols() != L_)
    entry.summands.resize(n_, L_);
  for (int p = 0; p < L_; ++p)
    entry.summands.col(p) = V_.block(p * n_, 0, n_, n_) * wv;
  last_consumed_ = t_;

  // P_{t|t} = V - V C~^T S^{-1} C~ V.
  sym_rank_update(Pf_, V_, W_, U_, -1.0, n_, nb);

  // Predict: shift the filtered grid one block down the diagonal.
  x_pred_ = model_.A * x_pred_ + model_.A * (W_.topRows(n_) * innov);
  if (u) x_pred_ += *u;
  Pp_.topLeftCorner(n_, n_) =
      model_.A * Pf_.topLeftCorner(n_, n_) * model_.A.transpose() + BBt_;
  Pp_.topRightCorner(n_, a_ - n_) =
      model_.A * Pf_.topLeftCorner(n_, a_ - n_);
  Pp_.bottomLeftCorner(a_ - n_, n_) =
      Pp_.topRightCorner(n_, a_ - n_).transpose();
  Pp_.bottomRightCorner(a_ - n_, a_ - n_) =
      Pf_.topLeftCorner(a_ - n_, a_ - n_);

  // Risk distortion on the trailing block. The correction is formed as an
  // exact square X^T X with X = chol(-Gamma)^{-1} H P~, so the distorted
  // covariance dominates the prediction to rounding.
  Mat PLL = Pp_.bottomRightCorner(n_, n_);
  double theta = solve_theta(PLL, c).theta;
  if (theta == 0.0) {
    V_ = Pp_;
  } else {
    Mat neg_gamma = sym((1.0 / theta) * Mat::Identity(n_, n_) - PLL);
    if (neg_gamma.rows() > cap)
      throw std::logic_error("rfls: attempted inversion larger than max(n, m)");
    Eigen::LLT<Mat> llt(neg_gamma);
    if (llt.info() != Eigen::Success)
      fail(ErrorCode::ThetaOutOfRange, "rfls: distortion factor is not PD");
    Mat Xt = llt.matrixL().solve(Pp_.rightCols(n_).transpose()).transpose();
    sym_rank_update(V_, Pp_, Xt, Xt, 1.0, n_, nb);
  }

  if (monitor_) {
    monitor_->record(V_, Pp_);
    if (monitor_->max_asymmetry > 1e-8)
      fail(ErrorCode::BlockInconsistency,
           "rfls: assembled covariance lost symmetry");
  }

  StepResult res;
  res.theta = theta;
  if (t_ >= L_ - 1) res.estimate = combine(L_ - 1);
  ++t_;
  return res;
}

Vec RflsSmoother::combine(int ell) const {
  const int s = last_consumed_;
  if (ell < 0 || ell > L_ - 1 || s - ell < 0 || ring(s - ell).t != s - ell)
    fail(ErrorCode::WindowIncomplete, "rfls combine: window incomplete");
  Vec est = ring(s - ell).x_pred;
  for (int j = s - ell; j <= s; ++j)
    est += ring(j).summands.col(j - (s - ell));
  return est;
}

Mat RflsSmoother::gain_stacked() const {
  Mat g(a_, m_);
  g.topRows(n_) = model_.A * W_.topRows(n_);
  g.bottomRows(a_ - n_) = W_.topRows(a_ - n_);
  return g;
}

RflsResult rfls_run(const StateSpaceModel& model, const std::vector<Vec>& Y,
                    int L, const KLBudget& budget, const std::vector<Vec>* u,
                    const RflsOptions& opts) {
  const int N = static_cast<int>(Y.size()) - 1;
  if (N + 1 < L)
    fail(ErrorCode::InsufficientData, "rfls_run: need at least L observations");
  RflsSmoother sm(model, L, budget, opts.filler);
  sm.attach_monitor(opts.monitor);

  RflsResult res;
  res.gains.lag = L;
  for (int t = 0; t <= N; ++t) {
    res.out.innovation_trace.push_back(Y[t] - model.C * sm.x_pred());
    auto st = sm.step(Y[t], u ? &(*u)[t] : nullptr);
    res.out.predictor_trace.push_back(sm.x_pred());
    res.thetas.push_back(st.theta);
    res.gains.stacked.push_back(sm.gain_stacked());
    if (opts.record_blocks) {
      const Mat& V = sm.cov();
      const int n = model.n, a = (L + 1) * n;
      res.vLL_trace.push_back(V.bottomRightCorner(n, n));
      res.vLLm1_trace.push_back(V.block(a - n, a - 2 * n, n, n));
    }
    if (st.estimate) res.out.estimates.push_back({t, *st.estimate});
  }
  return res;
}

GainThetaSchedule rfls_schedule(const StateSpaceModel& model, int L,
                                const KLBudget& budget, int N) {
  RflsSmoother sm(model, L, budget);
  GainThetaSchedule sched;
  Vec y0 = Vec::Zero(model.m);
  for (int t = 0; t <= N; ++t) {
    auto st = sm.step(y0);
    sched.gains.push_back(sm.gain_stacked());
    sched.thetas.push_back(st.theta);
  }
  return sched;
}

}  // namespace klfls
