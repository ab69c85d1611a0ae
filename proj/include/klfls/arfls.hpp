#pragma once

#include <optional>
#include <vector>

#include "klfls/model.hpp"
#include "klfls/monitor.hpp"
#include "klfls/nominal.hpp"
#include "klfls/risk.hpp"
#include "klfls/schedule.hpp"

namespace klfls {

// Augmented-form robust fixed-lag smoother. Runs the full (L+1)n Riccati
// recursion with dense matrices; O(L^3) per step. Kept as the reference
// implementation the reduced-order smoother is tested against.
class ArflsSmoother {
 public:
  ArflsSmoother(const AugmentedModel& aug, const KLBudget& budget,
                double filler = 1.0);

  struct StepResult {
    Vec estimate;  // x_{t-L+1|t} = H xi_{t+1}
    double theta;
  };

  // Consumes y_t; w_stacked is the optional deterministic input already
  // stacked to (L+1)n (the state-equation input occupies the leading block).
  StepResult step(const Vec& y, const Vec* w_stacked = nullptr);

  int t() const { return t_; }
  const Vec& xi_pred() const { return xi_; }      // xi_{t|t-1}
  const Mat& V_aug() const { return V_; }         // V~_t
  const Mat& P_next() const { return P_; }        // P~_t (last prediction)
  const Mat& gain() const { return G_; }          // G~_{t-1} (last step)
  const Vec& innovation() const { return innov_; }  // y_{t-1} - C~ xi_{t-1}

  void attach_monitor(PositivityMonitor* m) { monitor_ = m; }

 private:
  const AugmentedModel& aug_;
  KLBudget budget_;
  Mat BBt_, DDt_, Ct_, Ia_;
  Vec xi_;
  Mat V_, P_, G_;
  // Step workspace, sized once.
  Mat AV_, Pinv_, VC_, Graw_, Gt_, SGt_, S_;
  Vec xi_next_, innov_;
  Eigen::LLT<Mat> llt_small_;
  Eigen::PartialPivLU<Mat> lu_big_;
  int t_ = 0;
  PositivityMonitor* monitor_ = nullptr;
};

struct ArflsResult {
  SmootherOutput out;
  std::vector<double> thetas;        // theta_t, t = 0 ... N
  std::vector<Mat> gains;            // G~_t stacked (L+1)n x m
  // Filled only when record_covariances is set (memory heavy).
  std::vector<Mat> V_trace;          // V~_t, t = 0 ... N
  std::vector<Mat> P_trace;          // P~_{t+1}, t = 0 ... N
};

struct ArflsOptions {
  bool record_covariances = false;
  double filler = 1.0;
  PositivityMonitor* monitor = nullptr;
};

ArflsResult arfls_run(const StateSpaceModel& model, const std::vector<Vec>& Y,
                      int L, const KLBudget& budget,
                      const std::vector<Vec>* u = nullptr,
                      const ArflsOptions& opts = {});

// Runs the covariance recursion only (zero data) for adversary
// construction and Lyapunov evaluation.
GainThetaSchedule arfls_schedule(const AugmentedModel& aug,
                                 const KLBudget& budget, int N);

}  // namespace klfls
