#pragma once

#include <vector>

#include "klfls/linalg.hpp"

namespace klfls {

// Per-time stacked smoother gain G'_t = [(G'^0_t)^T ... (G'^L_t)^T]^T,
// each block n x m. The robust smoother's own gains have this shape, as
// does the standard smoother's; both feed the least-favorable machinery.
struct GainSchedule {
  std::vector<Mat> stacked;  // (L+1)n x m per time step
  int lag = 0;
};

// Gain and risk-sensitivity schedules of a smoother run. Both are
// measurement independent, so they can be produced without data.
struct GainThetaSchedule {
  std::vector<Mat> gains;      // G~_t, t = 0 ... N
  std::vector<double> thetas;  // theta_t
};

}  // namespace klfls
