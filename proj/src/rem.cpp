#include "klfls/rem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "klfls/leastfav.hpp"
#include "klfls/nominal.hpp"
#include "klfls/rfls.hpp"

namespace klfls {

ModelClass sysid_example_class() {
  ModelClass cls;
  cls.dim = 2;
  cls.lower = Vec::Zero(2);
  cls.upper = Vec::Ones(2);
  cls.builder = [](const Vec& alpha) {
    StateSpaceModel m;
    m.n = 2;
    m.m = 1;
    m.A = Mat::Zero(2, 2);
    m.A(0, 0) = alpha(0);
    m.A(0, 1) = 1.0;
    m.A(1, 1) = alpha(1);
    m.B = Mat::Zero(2, 3);
    m.B(0, 0) = 0.01;
    m.B(1, 1) = 0.45;
    m.C = Mat::Zero(1, 2);
    m.C(0, 0) = 1.0;
    m.C(0, 1) = -1.0;
    m.D = Mat::Zero(1, 3);
    m.D(0, 2) = 0.01;
    m.x0_mean = Vec::Zero(2);
    m.V0 = 1e-4 * Mat::Identity(2, 2);
    return validate_model(m);
  };
  return cls;
}

EStepStats estep_stats(const ModelClass& cls, const Vec& alpha,
                       const std::vector<Vec>& Y, int L, double c) {
  if (L < 2) fail(ErrorCode::InvalidArgument, "estep_stats: lag must be >= 2");
  const StateSpaceModel model = cls.builder(alpha);
  const int N = static_cast<int>(Y.size()) - 1;
  if (N + 1 < L)
    fail(ErrorCode::InsufficientData, "estep_stats: need at least L observations");

  // Robust smoother pass: gains, thetas and the two smoothed trajectories.
  RflsSmoother sm(model, L, KLBudget(c));
  std::vector<Mat> gains;
  std::vector<double> thetas;
  std::vector<Vec> x_lag(N + 1), x_lag1(N + 1);
  for (int t = 0; t <= N; ++t) {
    auto st = sm.step(Y[t]);
    gains.push_back(sm.gain_stacked());
    thetas.push_back(st.theta);
    if (t >= L - 1) {
      x_lag[t] = sm.combine(L - 1);   // x_{t-L+1|t}
      x_lag1[t] = sm.combine(L - 2);  // x_{t-L+2|t}
    }
  }

  // Adversary and its error-covariance schedule under the robust gains.
  AugmentedModel aug = build_augmented(model, L);
  LeastFavorableModel lf = backward_recursion(aug, gains, thetas);
  GainSchedule sched{gains, L};
  ErrorCovarianceTrace trace = evaluate_gains(lf, sched);

  EStepStats stats;
  stats.rtilde = trace.rtilde;
  const int t_max = std::min(N - 1, N - L + 1);
  stats.truncated = (N - 1) - t_max;
  for (int t = 0; t <= t_max; ++t) {
    const int s = t + L - 1;  // window end supplying the smoothed pair
    const Vec& xt = x_lag[s];
    const Vec& xt1 = x_lag1[s];
    stats.xhat_lag.push_back(xt);
    stats.xhat_lag1.push_back(xt1);
    stats.phi1.push_back(trace.pibar[s] + xt1 * xt1.transpose());
    stats.phi2.push_back(trace.piLLm1[s].transpose() + xt1 * xt.transpose());
    stats.phi3.push_back(trace.pibar[s] + xt * xt.transpose());
    stats.phi4.push_back(Y[t + 1] * Y[t + 1].transpose());
    stats.phi5.push_back(Y[t + 1] * xt1.transpose());
  }
  return stats;
}

double q_lower_bound(const ModelClass& cls, const Vec& alpha,
                     const EStepStats& stats) {
  const StateSpaceModel m = cls.builder(alpha);
  constexpr double ln2pi = 1.8378770664093453;
  double q = 0.0;
  for (size_t i = 0; i < stats.phi1.size(); ++i) {
    Mat Mb = m.B * stats.rtilde[i] * m.B.transpose();
    Mat Md = m.D * stats.rtilde[i + 1] * m.D.transpose();
    Eigen::LLT<Mat> lltb(sym(Mb)), lltd(sym(Md));
    if (lltb.info() != Eigen::Success || lltd.info() != Eigen::Success)
      fail(ErrorCode::SingularNoiseCovariance,
           "q_lower_bound: noise covariance is singular at this alpha");

    Mat state_mom = stats.phi1[i] - stats.phi2[i] * m.A.transpose() -
                    m.A * stats.phi2[i].transpose() +
                    m.A * stats.phi3[i] * m.A.transpose();
    Mat meas_mom = stats.phi4[i] - m.C * stats.phi5[i].transpose() -
                   stats.phi5[i] * m.C.transpose() +
                   m.C * stats.phi1[i] * m.C.transpose();

    double ldb = 2.0 * lltb.matrixL().toDenseMatrix().diagonal().array().log().sum();
    double ldd = 2.0 * lltd.matrixL().toDenseMatrix().diagonal().array().log().sum();
    q -= 0.5 * (m.n * ln2pi + ldb + lltb.solve(state_mom).trace());
    q -= 0.5 * (m.m * ln2pi + ldd + lltd.solve(meas_mom).trace());
  }
  return q;
}

NelderMeadResult nelder_mead_max(const std::function<double(const Vec&)>& f,
                                 const Vec& x0, const Vec& lower,
                                 const Vec& upper, int max_evals, double tol) {
  const int d = static_cast<int>(x0.size());
  auto clamp = [&](Vec x) {
    for (int i = 0; i < d; ++i) x(i) = std::clamp(x(i), lower(i), upper(i));
    return x;
  };

  int evals = 0;
  auto eval = [&](const Vec& x) {
    ++evals;
    return f(clamp(x));
  };

  std::vector<Vec> xs(d + 1);
  std::vector<double> fs(d + 1);
  auto order = [&]() {
    for (int i = 0; i <= d; ++i)
      for (int j = i + 1; j <= d; ++j)
        if (fs[j] > fs[i]) {
          std::swap(fs[i], fs[j]);
          std::swap(xs[i], xs[j]);
        }
  };

  // One simplex descent phase from the given start and edge scale.
  auto phase = [&](const Vec& start, double f_start, double scale) {
    xs[0] = clamp(start);
    fs[0] = f_start;
    for (int i = 0; i < d; ++i) {
      Vec v = xs[0];
      double step = scale * (upper(i) - lower(i));
      v(i) = (v(i) + step <= upper(i)) ? v(i) + step : v(i) - step;
      xs[i + 1] = clamp(v);
      fs[i + 1] = eval(xs[i + 1]);
      if (evals >= max_evals) break;
    }
    order();
    bool shrunk_out = false;
    while (evals < max_evals) {
      double spread = 0.0;
      for (int i = 1; i <= d; ++i)
        spread = std::max(spread, (xs[i] - xs[0]).norm());
      if (spread < tol && std::abs(fs[0] - fs[d]) < tol) {
        shrunk_out = true;
        break;
      }
      Vec centroid = Vec::Zero(d);
      for (int i = 0; i < d; ++i) centroid += xs[i];
      centroid /= d;
      Vec xr = clamp(centroid + (centroid - xs[d]));
      double fr = eval(xr);
      if (fr > fs[0]) {
        Vec xe = clamp(centroid + 2.0 * (centroid - xs[d]));
        double fe = eval(xe);
        if (fe > fr) {
          xs[d] = xe;
          fs[d] = fe;
        } else {
          xs[d] = xr;
          fs[d] = fr;
        }
      } else if (fr > fs[d - 1]) {
        xs[d] = xr;
        fs[d] = fr;
      } else {
        Vec xc = clamp(centroid + 0.5 * (xs[d] - centroid));
        double fc = eval(xc);
        if (fc > fs[d]) {
          xs[d] = xc;
          fs[d] = fc;
        } else {
          for (int i = 1; i <= d; ++i) {
            xs[i] = clamp(xs[0] + 0.5 * (xs[i] - xs[0]));
            fs[i] = eval(xs[i]);
            if (evals >= max_evals) break;
          }
        }
      }
      order();
    }
    return shrunk_out;
  };

  // A collapsed simplex inside a narrow curved valley is not a certificate
  // of optimality; restarting with a fresh, smaller simplex at the best
  // point recovers the remaining progress within the evaluation budget.
  NelderMeadResult res;
  Vec best = clamp(x0);
  double f_best = eval(best);
  bool last_converged = false;
  for (double scale : {0.05, 0.02, 0.005, 0.001}) {
    if (evals >= max_evals) break;
    last_converged = phase(best, f_best, scale);
    if (fs[0] > f_best) {
      best = xs[0];
      f_best = fs[0];
    }
  }
  res.x = best;
  res.f = f_best;
  res.converged = last_converged;
  res.evaluations = evals;
  return res;
}

MStepResult m_step(const ModelClass& cls, const EStepStats& stats,
                   const Vec& alpha_n) {
  auto objective = [&](const Vec& a) {
    try {
      return q_lower_bound(cls, a, stats);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::SingularNoiseCovariance)
        return -std::numeric_limits<double>::infinity();
      throw;
    }
  };
  NelderMeadResult nm =
      nelder_mead_max(objective, alpha_n, cls.lower, cls.upper, 200, 1e-6);
  return {nm.x, nm.f, !nm.converged, nm.evaluations};
}

namespace {

// EM loop shared by the three variants; stats_fn maps the current iterate
// to its E-step statistics.
RemTrace em_loop(const ModelClass& cls, const Vec& alpha0, double eps,
                 int max_iter,
                 const std::function<EStepStats(const Vec&)>& stats_fn) {
  RemTrace trace;
  Vec alpha = alpha0;
  for (int i = 0; i < alpha.size(); ++i)
    alpha(i) = std::clamp(alpha(i), cls.lower(i), cls.upper(i));
  trace.alphas.push_back(alpha);
  trace.termination = "max_iter";
  for (int it = 0; it < max_iter; ++it) {
    EStepStats stats = stats_fn(alpha);
    MStepResult ms = m_step(cls, stats, alpha);
    trace.q_values.push_back(ms.q);
    double delta = (ms.alpha - alpha).norm();
    alpha = ms.alpha;
    trace.alphas.push_back(alpha);
    ++trace.iterations;
    if (delta <= eps) {
      trace.termination = "eps";
      break;
    }
  }
  return trace;
}

EStepStats rts_stats(const ModelClass& cls, const Vec& alpha,
                     const std::vector<Vec>& Y) {
  const StateSpaceModel model = cls.builder(alpha);
  RtsResult rts = rts_smooth(model, Y);
  const int N = static_cast<int>(Y.size()) - 1;
  EStepStats stats;
  const int w = model.m + model.n;
  stats.rtilde.assign(N + 1, Mat::Identity(w, w));
  for (int t = 0; t < N; ++t) {
    const Vec& xt = rts.x_smooth[t];
    const Vec& xt1 = rts.x_smooth[t + 1];
    stats.xhat_lag.push_back(xt);
    stats.xhat_lag1.push_back(xt1);
    stats.phi1.push_back(rts.P_smooth[t + 1] + xt1 * xt1.transpose());
    stats.phi2.push_back(rts.P_cross[t] + xt1 * xt.transpose());
    stats.phi3.push_back(rts.P_smooth[t] + xt * xt.transpose());
    stats.phi4.push_back(Y[t + 1] * Y[t + 1].transpose());
    stats.phi5.push_back(Y[t + 1] * xt1.transpose());
  }
  return stats;
}

}  // namespace

RemTrace rem_run(const ModelClass& cls, const std::vector<Vec>& Y, int L,
                 double c, const Vec& alpha0, double eps, int max_iter) {
  return em_loop(cls, alpha0, eps, max_iter, [&](const Vec& a) {
    return estep_stats(cls, a, Y, L, c);
  });
}

RemTrace em_run(const ModelClass& cls, const std::vector<Vec>& Y,
                const Vec& alpha0, double eps, int max_iter) {
  return em_loop(cls, alpha0, eps, max_iter,
                 [&](const Vec& a) { return rts_stats(cls, a, Y); });
}

RemTrace emfl_run(const ModelClass& cls, const std::vector<Vec>& Y, int L,
                  const Vec& alpha0, double eps, int max_iter) {
  return rem_run(cls, Y, L, 0.0, alpha0, eps, max_iter);
}

}  // namespace klfls
