#pragma once

#include <optional>
#include <vector>

#include "klfls/model.hpp"
#include "klfls/monitor.hpp"
#include "klfls/nominal.hpp"
#include "klfls/risk.hpp"
#include "klfls/schedule.hpp"

namespace klfls {

// Reduced-order robust fixed-lag smoother. Operates on the n x n block
// parametrization of the stacked covariance; every matrix inversion is of
// size max(n, m) at most and a step costs O(L^2) block operations. The
// block grids update in parallel (OpenMP) when more than one worker is
// configured; the serial path runs the identical loops.
class RflsSmoother {
 public:
  RflsSmoother(const StateSpaceModel& model, int L, const KLBudget& budget,
               double filler = 1.0);

  struct StepResult {
    std::optional<Vec> estimate;  // x_{t-L+1|t}, present once t >= L-1
    double theta;
  };

  StepResult step(const Vec& y, const Vec* u = nullptr);

  // x_{s-ell|s} for the most recently consumed step s, 0 <= ell <= L-1.
  Vec combine(int ell) const;

  int t() const { return t_; }
  const Vec& x_pred() const { return x_pred_; }     // x_{t|t-1}
  const Mat& cov() const { return V_; }             // assembled V~_t
  const Mat& pred_cov() const { return Pp_; }       // assembled P~_t
  Mat gain_stacked() const;                         // G~ of the last step

  void attach_monitor(PositivityMonitor* m) { monitor_ = m; }

 private:
  struct HistEntry {
    Vec x_pred;
    Mat summands;  // n x L, column p = V^p V^{-1} L (y - C x_pred)
    int t = -1;
  };
  HistEntry& ring(int t) { return history_[t % (L_ + 1)]; }
  const HistEntry& ring(int t) const { return history_[t % (L_ + 1)]; }

  StateSpaceModel model_;
  KLBudget budget_;
  int L_;
  int n_, m_, a_;
  Mat Ct_, DDt_, BBt_;
  Mat V_, Pf_, Pp_;  // V~_t, P~_{t|t}, P~_{t+1}
  Mat U_, W_;        // V C~^T and its S^{-1} product (filter gain column)
  Vec x_pred_;
  std::vector<HistEntry> history_;
  int t_ = 0;
  int last_consumed_ = -1;
  PositivityMonitor* monitor_ = nullptr;
};

struct RflsResult {
  SmootherOutput out;
  std::vector<double> thetas;
  GainSchedule gains;
  // Recorded only on request: trailing covariance blocks per step.
  std::vector<Mat> vLL_trace;    // V^{L,L}_t
  std::vector<Mat> vLLm1_trace;  // V^{L,L-1}_t
};

struct RflsOptions {
  bool record_blocks = false;
  double filler = 1.0;
  PositivityMonitor* monitor = nullptr;
};

RflsResult rfls_run(const StateSpaceModel& model, const std::vector<Vec>& Y,
                    int L, const KLBudget& budget,
                    const std::vector<Vec>* u = nullptr,
                    const RflsOptions& opts = {});

GainThetaSchedule rfls_schedule(const StateSpaceModel& model, int L,
                                const KLBudget& budget, int N);

}  // namespace klfls
