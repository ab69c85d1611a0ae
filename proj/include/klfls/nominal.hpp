#pragma once

#include <optional>
#include <vector>

#include "klfls/model.hpp"

namespace klfls {

struct SmootherOutput {
  struct Estimate {
    int t;  // estimate of x_{t-L+1} given Y_t
    Vec x;
  };
  std::vector<Estimate> estimates;      // t = L-1 ... N
  std::vector<Vec> predictor_trace;     // x_{t+1|t}, t = 0 ... N
  std::vector<Vec> innovation_trace;    // y_t - C x_{t|t-1}, t = 0 ... N
};

// Standard fixed-lag smoother: the zero-budget case of the robust smoother
// (shares its code path). Optional per-step deterministic input u_t enters
// the state equation as x_{t+1} = A x_t + B v_t + u_t.
SmootherOutput fls_run(const StateSpaceModel& model, const std::vector<Vec>& Y,
                       int L, const std::vector<Vec>* u = nullptr);

struct RtsResult {
  std::vector<Vec> x_smooth;   // x_{t|N}, t = 0 ... N
  std::vector<Mat> P_smooth;   // P_{t|N}
  std::vector<Mat> P_cross;    // P_{t,t-1|N}, t = 1 ... N (index t-1)
  std::vector<Vec> x_filt;     // x_{t|t}
  std::vector<Mat> P_filt;     // P_{t|t}
};

// Forward Kalman filter plus backward Rauch-Tung-Striebel pass with the
// lag-one cross covariances needed for EM sufficient statistics.
RtsResult rts_smooth(const StateSpaceModel& model, const std::vector<Vec>& Y);

}  // namespace klfls
