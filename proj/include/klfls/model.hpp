#pragma once

#include <string>
#include <vector>

#include "klfls/linalg.hpp"
#include "klfls/rng.hpp"

namespace klfls {

// Discrete-time linear Gaussian model
//   x_{t+1} = A x_t + B v_t,  y_t = C x_t + D v_t,
// with v_t normalized white noise of dimension m+n, x_0 ~ N(x0_mean, V0).
// B D^T = 0 keeps process and measurement noise independent; rank(B) = n
// and rank(D) = m keep both covariances full rank.
struct StateSpaceModel {
  Mat A;        // n x n
  Mat B;        // n x (m+n)
  Mat C;        // m x n
  Mat D;        // m x (m+n)
  Vec x0_mean;  // n
  Mat V0;       // n x n, SPD
  int n = 0;
  int m = 0;
};

// Lag-stacked model turning fixed-lag smoothing into one-step prediction.
// The stacked state is xi_t = [x_t; x_{t-1}; ...; x_{t-L}] and
// H_sel * xi_{t+1} = x_{t-L+1} extracts the oldest block.
struct AugmentedModel {
  Mat A_aug;  // (L+1)n x (L+1)n
  Mat B_aug;  // (L+1)n x (m+n)
  Mat C_aug;  // m x (L+1)n
  Mat D_aug;  // m x (m+n)
  Mat H_sel;  // n x (L+1)n
  int lag = 0;
  StateSpaceModel base;

  int dim() const { return static_cast<int>(A_aug.rows()); }
};

const StateSpaceModel& validate_model(const StateSpaceModel& m);

AugmentedModel build_augmented(const StateSpaceModel& m, int lag);

// Stacked initial covariance: V0 in the leading block, identity fillers on
// the remaining diagonal. The smoother output for t >= L-1 does not depend
// on the filler choice; tests assert that rather than assume it.
Mat augmented_initial_cov(const StateSpaceModel& m, int lag,
                          double filler = 1.0);
Vec augmented_initial_mean(const StateSpaceModel& m, int lag);

// Second-order kinematic target model with exponentially autocorrelated
// acceleration noise, two independent axes (position, velocity each).
// V0 = diag(50, 5, 50, 5), zero initial mean.
StateSpaceModel make_singer(double T, double sigma2_m, double alpha,
                            const Mat& r_meas);

// Random test system: A uniform entries rescaled to the requested spectral
// radius, B/D built from an orthogonal-complement split of the noise space
// so that B D^T = 0 and both rank conditions hold.
StateSpaceModel random_model(int n, int m, std::uint64_t seed,
                             double target_radius);

struct Simulation {
  std::vector<Vec> x;  // x_0 ... x_{N+1}
  std::vector<Vec> y;  // y_0 ... y_N
};

Simulation simulate(const StateSpaceModel& m, int N, Rng& rng,
                    const Vec* x0 = nullptr);

std::string model_to_json(const StateSpaceModel& m);
StateSpaceModel model_from_json(const std::string& text);

}  // namespace klfls
