#include "klfls/nominal.hpp"

#include "klfls/rfls.hpp"

namespace klfls {

SmootherOutput fls_run(const StateSpaceModel& model, const std::vector<Vec>& Y,
                       int L, const std::vector<Vec>* u) {
  return rfls_run(model, Y, L, KLBudget(0.0), u).out;
}

RtsResult rts_smooth(const StateSpaceModel& model, const std::vector<Vec>& Y) {
  const int N = static_cast<int>(Y.size()) - 1;
  if (N < 0) fail(ErrorCode::InsufficientData, "rts_smooth: empty observation set");
  const int n = model.n;
  const Mat Q = model.B * model.B.transpose();
  const Mat R = model.D * model.D.transpose();

  std::vector<Vec> x_pred(N + 1), x_filt(N + 1);
  std::vector<Mat> P_pred(N + 1), P_filt(N + 1), K_gain(N + 1);

  Vec x = model.x0_mean;
  Mat P = model.V0;
  for (int t = 0; t <= N; ++t) {
    x_pred[t] = x;
    P_pred[t] = P;
    Mat S = model.C * P * model.C.transpose() + R;
    Mat K = spd_solve(S, model.C * P).transpose();
    x_filt[t] = x + K * (Y[t] - model.C * x);
    P_filt[t] = sym(P - K * model.C * P);
    K_gain[t] = K;
    x = model.A * x_filt[t];
    P = sym(model.A * P_filt[t] * model.A.transpose() + Q);
  }

  RtsResult res;
  res.x_smooth.resize(N + 1);
  res.P_smooth.resize(N + 1);
  res.P_cross.resize(N);
  res.x_filt = x_filt;
  res.P_filt = P_filt;

  res.x_smooth[N] = x_filt[N];
  res.P_smooth[N] = P_filt[N];
  std::vector<Mat> J(N + 1);
  for (int t = N - 1; t >= 0; --t) {
    Mat Pnext = sym(model.A * P_filt[t] * model.A.transpose() + Q);
    J[t] = spd_solve(Pnext, model.A * P_filt[t]).transpose();
    res.x_smooth[t] =
        x_filt[t] + J[t] * (res.x_smooth[t + 1] - model.A * x_filt[t]);
    res.P_smooth[t] =
        sym(P_filt[t] + J[t] * (res.P_smooth[t + 1] - Pnext) * J[t].transpose());
  }

  // Lag-one smoothed cross covariances, gain-product recursion.
  if (N >= 1) {
    Mat cross = (Mat::Identity(n, n) - K_gain[N] * model.C) * model.A *
                P_filt[N - 1];  // P_{N,N-1|N}
    res.P_cross[N - 1] = cross;
    for (int t = N - 1; t >= 1; --t) {
      cross = P_filt[t] * J[t - 1].transpose() +
              J[t] * (cross - model.A * P_filt[t]) * J[t - 1].transpose();
      res.P_cross[t - 1] = cross;
    }
  }
  return res;
}

}  // namespace klfls
