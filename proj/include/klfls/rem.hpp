#pragma once

#include <functional>
#include <string>
#include <vector>

#include "klfls/model.hpp"

namespace klfls {

// Parameterized family of nominal models over a box in parameter space.
struct ModelClass {
  int dim = 0;
  std::function<StateSpaceModel(const Vec&)> builder;
  Vec lower, upper;
};

// Two-parameter example family: upper-triangular A(alpha) with unit
// coupling, fixed B, C, D, V0 = 1e-4 I.
ModelClass sysid_example_class();

// E-step sufficient statistics. Summand index i corresponds to time t = i;
// sums are truncated where the lag window would run past the data.
struct EStepStats {
  std::vector<Mat> phi1, phi2, phi3, phi4, phi5;
  std::vector<Mat> rtilde;  // R~_t for t = 0 ... N (indexable at t and t+1)
  std::vector<Vec> xhat_lag;   // x_{t|t+L-1}
  std::vector<Vec> xhat_lag1;  // x_{t+1|t+L-1}
  int truncated = 0;           // boundary summands dropped
};

EStepStats estep_stats(const ModelClass& cls, const Vec& alpha,
                       const std::vector<Vec>& Y, int L, double c);

// EM lower bound Q(alpha, alpha_n) from the robust-smoother statistics.
double q_lower_bound(const ModelClass& cls, const Vec& alpha,
                     const EStepStats& stats);

// Derivative-free simplex maximizer, box-clamped. The initial point is a
// simplex vertex, so the best value never falls below f(x0).
struct NelderMeadResult {
  Vec x;
  double f = 0.0;
  bool converged = false;
  int evaluations = 0;
};

NelderMeadResult nelder_mead_max(const std::function<double(const Vec&)>& f,
                                 const Vec& x0, const Vec& lower,
                                 const Vec& upper, int max_evals = 200,
                                 double tol = 1e-6);

struct MStepResult {
  Vec alpha;
  double q = 0.0;
  bool stalled = false;
  int evaluations = 0;
};

MStepResult m_step(const ModelClass& cls, const EStepStats& stats,
                   const Vec& alpha_n);

struct RemTrace {
  std::vector<Vec> alphas;       // alpha^0, alpha^1, ...
  std::vector<double> q_values;  // Q after each accepted M-step
  std::string termination;       // "eps" or "max_iter"
  int iterations = 0;
};

// Robust EM: E-step statistics through the robust fixed-lag smoother and
// the least-favorable noise covariance schedule.
RemTrace rem_run(const ModelClass& cls, const std::vector<Vec>& Y, int L,
                 double c, const Vec& alpha0, double eps, int max_iter);

// Classical EM with RTS-smoother statistics.
RemTrace em_run(const ModelClass& cls, const std::vector<Vec>& Y,
                const Vec& alpha0, double eps, int max_iter);

// Fixed-lag EM: the zero-budget case of rem_run.
RemTrace emfl_run(const ModelClass& cls, const std::vector<Vec>& Y, int L,
                  const Vec& alpha0, double eps, int max_iter);

}  // namespace klfls
