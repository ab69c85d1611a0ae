#pragma once

#include <string>
#include <vector>

#include "klfls/model.hpp"
#include "klfls/rng.hpp"
#include "klfls/schedule.hpp"

namespace klfls {

// Time-varying adversarial model obtained from the backward recursion:
//   eta_{t+1} = Abar_t eta_t + Bbar_t eps_t,  y_t = Cbar_t eta_t + Dbar_t eps_t
// with eta_t = [xi_t; e~_t]. The large Eq-form matrices are assembled on
// demand from the stored per-step factors S~_t, L_t and the gain schedule.
struct LeastFavorableModel {
  AugmentedModel aug;
  std::vector<Mat> gains;      // G~_t, (L+1)n x m
  std::vector<double> thetas;  // theta_t
  std::vector<Mat> S;          // S~_t, (m+n) x (L+1)n
  std::vector<Mat> Lfact;      // L_t lower triangular, K~_{v_t} = L_t L_t^T
  int horizon = 0;             // N

  int dim() const { return aug.dim(); }
  Mat K_v(int t) const { return Lfact[t] * Lfact[t].transpose(); }

  Mat Abar(int t) const;  // 2(L+1)n square block form
  Mat Bbar(int t) const;  // 2(L+1)n x (m+n)
  Mat Cbar(int t) const;  // m x 2(L+1)n
  Mat Dbar(int t) const;  // m x (m+n)
};

// Backward recursion over t = N ... 0 from the smoother's gain and theta
// schedules. Throws DistortionSingular when the theta schedule is
// infeasible (the noise distortion loses positive definiteness).
LeastFavorableModel backward_recursion(const AugmentedModel& aug,
                                       const std::vector<Mat>& gains,
                                       const std::vector<double>& thetas);

enum class LfInit {
  Zero,         // xi_0 = 0, e~_0 = -xi0_mean
  RandomPrior,  // xi_0 ~ N(xi0_mean, V~_0), e~_0 = xi_0 - xi0_mean
};

struct LfSimulation {
  std::vector<Vec> x;      // physical state x_t, t = 0 ... N
  std::vector<Vec> y;      // y_t, t = 0 ... N
  std::vector<Vec> e_aux;  // e~_t, t = 0 ... N
};

LfSimulation lf_simulate(const LeastFavorableModel& lf, std::uint64_t seed,
                         LfInit init = LfInit::Zero);

// State-sized rewrite of the adversarial model:
//   x_{t+1} = A x_t + B(S~_t e~_t + L_t eps_t),  y_t likewise through C, D.
struct ReducedLfModel {
  const LeastFavorableModel* lf = nullptr;
  LfSimulation simulate(std::uint64_t seed, LfInit init = LfInit::Zero) const;
};

ReducedLfModel lf_reduce(const LeastFavorableModel& lf);

// Error-system Lyapunov recursion for an arbitrary gain schedule evaluated
// under the least favorable model. Pi_0 = ones(2,2) (x) V~_0.
struct ErrorCovarianceTrace {
  std::vector<Mat> pibar;        // H~ Pi~_t H~^T (n x n), t = 0 ... N+1
  std::vector<double> variance;  // tr(pibar_t)
  std::vector<Mat> piLLm1;       // (L, L-1) block of Pi~_t
  std::vector<Mat> rtilde;       // R~_t = S~ Pi22 S~^T + L L^T, t = 0 ... N
  std::vector<Mat> full_Pi;      // optional, 2(L+1)n square
};

struct EvaluateOptions {
  bool keep_full = false;
};

ErrorCovarianceTrace evaluate_gains(const LeastFavorableModel& lf,
                                    const GainSchedule& schedule,
                                    const EvaluateOptions& opts = {});

// Conditional Gaussian KL between the distorted and nominal one-step
// transition at a given smoother step, from the block UDL factorizations of
// the joint predictive covariances. Equals the budget c_t when theta_t was
// solved for it.
double kl_check(const AugmentedModel& aug, const Mat& gain, const Mat& V_t,
                const Mat& P_next, double theta);

std::string lf_to_json(const LeastFavorableModel& lf);

}  // namespace klfls
