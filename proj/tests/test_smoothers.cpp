#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "klfls/arfls.hpp"
#include "klfls/nominal.hpp"
#include "klfls/rfls.hpp"
#include "klfls/threads.hpp"

using namespace klfls;

namespace {

StateSpaceModel scalar_model(double A, double b, double C, double d,
                             double x0 = 0.0, double v0 = 1.0) {
  StateSpaceModel m;
  m.n = 1;
  m.m = 1;
  m.A = A * Mat::Ones(1, 1);
  m.B = (Mat(1, 2) << b, 0).finished();
  m.C = C * Mat::Ones(1, 1);
  m.D = (Mat(1, 2) << 0, d).finished();
  m.x0_mean = x0 * Vec::Ones(1);
  m.V0 = v0 * Mat::Ones(1, 1);
  return validate_model(m);
}

double rel_dev(const Vec& a, const Vec& b) {
  double worst = 0.0;
  for (int i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a(i) - b(i)) / (1.0 + std::abs(b(i))));
  return worst;
}

}  // namespace

TEST_CASE("one robust step, n=m=1, L=1, against plain-double arithmetic") {
  const double A = 0.9, b = 0.8, C = 1.1, d = 0.6, x0 = 0.3, v0 = 1.4;
  const double y = 0.75, c = 2e-3;
  StateSpaceModel m = scalar_model(A, b, C, d, x0, v0);
  AugmentedModel aug = build_augmented(m, 1);
  ArflsSmoother sm(aug, KLBudget(c));
  auto st = sm.step(y * Vec::Ones(1));

  // Hand evaluation. Stacked quantities are 2x2 with V~0 = diag(v0, 1).
  const double S = C * v0 * C + d * d;
  const double g0 = A * v0 * C / S;  // top block of the gain
  const double g1 = v0 * C / S;
  const double xi0 = A * x0 + g0 * (y - C * x0);
  const double xi1 = x0 + g1 * (y - C * x0);
  // P~ = A~ V~ A~^T - G S G^T + B~ B~^T, element by element.
  const double p00 = A * v0 * A - g0 * S * g0 + b * b;
  const double p01 = A * v0 - g0 * S * g1;
  const double p11 = v0 - g1 * S * g1;
  // theta solves the scalar gamma equation on p11.
  double lo = 0.0, hi = (1.0 - 1e-12) / p11, theta = 0.0;
  for (int i = 0; i < 200; ++i) {
    theta = 0.5 * (lo + hi);
    double gam = 0.5 * (1.0 / (1.0 - theta * p11) - 1.0 + std::log(1.0 - theta * p11));
    if (gam < c)
      lo = theta;
    else
      hi = theta;
  }
  // V~ = P~ + P~ H^T (theta^{-1} - p11)^{-1} H P~ (Woodbury with -Gamma).
  const double denom = 1.0 / theta - p11;
  const double v00 = p00 + p01 * p01 / denom;
  const double v01 = p01 + p01 * p11 / denom;
  const double v11 = p11 + p11 * p11 / denom;

  CHECK(st.estimate(0) == doctest::Approx(xi1).epsilon(1e-12));
  CHECK(st.theta == doctest::Approx(theta).epsilon(1e-8));
  CHECK(sm.xi_pred()(0) == doctest::Approx(xi0).epsilon(1e-12));
  CHECK(sm.V_aug()(0, 0) == doctest::Approx(v00).epsilon(1e-9));
  CHECK(sm.V_aug()(0, 1) == doctest::Approx(v01).epsilon(1e-9));
  CHECK(sm.V_aug()(1, 1) == doctest::Approx(v11).epsilon(1e-9));
}

TEST_CASE("zero-budget step is the standard augmented predictor step") {
  StateSpaceModel m = random_model(2, 1, 77, 0.9);
  AugmentedModel aug = build_augmented(m, 3);
  ArflsSmoother sm(aug, KLBudget(0.0));
  Vec y = Vec::Ones(1);

  Mat V = augmented_initial_cov(m, 3);
  Vec xi = augmented_initial_mean(m, 3);
  Mat S = aug.C_aug * V * aug.C_aug.transpose() +
          aug.D_aug * aug.D_aug.transpose();
  Mat G = aug.A_aug * V * aug.C_aug.transpose() * S.inverse();
  Vec xi_next = aug.A_aug * xi + G * (y - aug.C_aug * xi);
  Mat P = aug.A_aug * V * aug.A_aug.transpose() - G * S * G.transpose() +
          aug.B_aug * aug.B_aug.transpose();

  auto st = sm.step(y);
  CHECK(st.theta == 0.0);
  CHECK((sm.xi_pred() - xi_next).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((sm.V_aug() - P).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("reduced and augmented smoothers agree step by step") {
  StateSpaceModel m = random_model(2, 1, 5, 0.95);
  const int L = 5, N = 100;
  const double c = 1e-3;
  Rng rng(11);
  auto sim = simulate(m, N, rng);

  AugmentedModel aug = build_augmented(m, L);
  ArflsSmoother ref(aug, KLBudget(c));
  RflsSmoother red(m, L, KLBudget(c));

  double worst_v = 0.0, worst_theta = 0.0, worst_est = 0.0;
  for (int t = 0; t <= N; ++t) {
    auto sa = ref.step(sim.y[t]);
    auto sr = red.step(sim.y[t]);
    worst_v = std::max(worst_v,
                       (red.cov() - ref.V_aug()).cwiseAbs().maxCoeff());
    worst_theta = std::max(worst_theta, std::abs(sa.theta - sr.theta));
    if (sr.estimate)
      worst_est = std::max(worst_est, rel_dev(*sr.estimate, sa.estimate));
  }
  CHECK(worst_v <= 1e-8);
  CHECK(worst_theta <= 1e-10);
  CHECK(worst_est <= 1e-6);
}

TEST_CASE("combine at L=1 reduces to the filtered update") {
  StateSpaceModel m = scalar_model(0.8, 0.7, 1.0, 0.5);
  RflsSmoother sm(m, 1, KLBudget(0.0));
  Rng rng(12);
  auto sim = simulate(m, 30, rng);
  Mat V = m.V0;
  Vec x = m.x0_mean;
  for (int t = 0; t <= 30; ++t) {
    Mat S = m.C * V * m.C.transpose() + m.D * m.D.transpose();
    Mat K = V * m.C.transpose() * S.inverse();
    Vec x_filt = x + K * (sim.y[t] - m.C * x);
    auto st = sm.step(sim.y[t]);
    REQUIRE(st.estimate.has_value());
    CHECK((*st.estimate - x_filt).cwiseAbs().maxCoeff() < 1e-12);
    Mat Pf = V - K * m.C * V;
    x = m.A * x_filt;
    V = m.A * Pf * m.A.transpose() + m.B * m.B.transpose();
  }
}

TEST_CASE("tracking run: counts, positive thetas, matching error level") {
  StateSpaceModel singer = make_singer(0.01, 5.0, 2.0, Mat::Identity(2, 2));
  Rng rng(13);
  auto sim = simulate(singer, 500, rng);

  auto red = rfls_run(singer, sim.y, 20, KLBudget(1e-3));
  auto ref = arfls_run(singer, sim.y, 20, KLBudget(1e-3));
  CHECK(red.out.estimates.size() == 482);
  for (double th : red.thetas) CHECK(th > 0.0);

  auto rmse = [&](const SmootherOutput& o) {
    double acc = 0.0;
    int cnt = 0;
    for (const auto& e : o.estimates) {
      int tau = e.t - 19;
      acc += (e.x - sim.x[tau]).squaredNorm();
      ++cnt;
    }
    return std::sqrt(acc / cnt);
  };
  double rr = rmse(red.out), ra = rmse(ref.out);
  CHECK(rr == doctest::Approx(ra).epsilon(1e-4));  // 4 significant digits
}

TEST_CASE("larger budget inflates the distorted covariance everywhere") {
  StateSpaceModel m = random_model(2, 1, 31, 0.9);
  Rng rng(14);
  auto sim = simulate(m, 60, rng);
  ArflsOptions opts;
  opts.record_covariances = true;
  auto r0 = arfls_run(m, sim.y, 4, KLBudget(0.0), nullptr, opts);
  auto r1 = arfls_run(m, sim.y, 4, KLBudget(1e-3), nullptr, opts);
  auto r2 = arfls_run(m, sim.y, 4, KLBudget(5e-3), nullptr, opts);
  for (size_t t = 1; t < r0.V_trace.size(); ++t) {
    CHECK(r1.V_trace[t].trace() > r0.V_trace[t].trace());
    CHECK(r2.V_trace[t].trace() > r1.V_trace[t].trace());
  }
}

TEST_CASE("positivity invariants along robust runs") {
  StateSpaceModel m = random_model(3, 2, 55, 0.95);
  Rng rng(15);
  auto sim = simulate(m, 80, rng);
  PositivityMonitor mon_a, mon_r;
  ArflsOptions ao;
  ao.monitor = &mon_a;
  RflsOptions ro;
  ro.monitor = &mon_r;
  arfls_run(m, sim.y, 6, KLBudget(1e-2), nullptr, ao);
  rfls_run(m, sim.y, 6, KLBudget(1e-2), nullptr, ro);
  for (const auto* mon : {&mon_a, &mon_r}) {
    CHECK(mon->min_eig_V > 0.0);
    CHECK(mon->min_eig_P > 0.0);
    CHECK(mon->min_eig_V_minus_P >= -1e-10);
  }
  // theta stays inside the admissible interval at every step.
  ArflsOptions rec;
  rec.record_covariances = true;
  auto res = arfls_run(m, sim.y, 6, KLBudget(1e-2), nullptr, rec);
  AugmentedModel aug = build_augmented(m, 6);
  for (size_t t = 0; t < res.thetas.size(); ++t) {
    double r = max_eig(aug.H_sel * res.P_trace[t] * aug.H_sel.transpose());
    CHECK(res.thetas[t] * r < 1.0);
  }
}

TEST_CASE("emitted output does not depend on the filler blocks") {
  StateSpaceModel m = random_model(2, 2, 71, 0.9);
  const int L = 4, N = 60;
  Rng rng(16);
  auto sim = simulate(m, N, rng);

  ArflsOptions o1, o2;
  o1.filler = 1.0;
  o2.filler = 2.5;
  auto r1 = arfls_run(m, sim.y, L, KLBudget(1e-3), nullptr, o1);
  auto r2 = arfls_run(m, sim.y, L, KLBudget(1e-3), nullptr, o2);
  for (size_t k = 0; k < r1.out.estimates.size(); ++k)
    CHECK((r1.out.estimates[k].x - r2.out.estimates[k].x).cwiseAbs().maxCoeff() <=
          1e-12);
  for (size_t t = L - 1; t < r1.thetas.size(); ++t)
    CHECK(r1.thetas[t] == doctest::Approx(r2.thetas[t]).epsilon(1e-9));
}

TEST_CASE("deterministic input: smoother follows the driven trajectory") {
  StateSpaceModel m = scalar_model(0.9, 1e-7, 1.0, 1e-7, 0.0, 1e-10);
  const int N = 80, L = 3;
  std::vector<Vec> u(N + 1), y(N + 1);
  Rng rng(17);
  Vec x = Vec::Zero(1);
  std::vector<Vec> truth;
  for (int t = 0; t <= N; ++t) {
    u[t] = Vec::Ones(1) * std::sin(0.1 * t);
    truth.push_back(x);
    Vec v(2);
    v << rng.gaussian(), rng.gaussian();
    y[t] = m.C * x + m.D * v;
    x = m.A * x + m.B * v + u[t];
  }

  auto out = fls_run(m, y, L, &u);
  for (const auto& est : out.estimates) {
    int tau = est.t - L + 1;
    CHECK(std::abs(est.x(0) - truth[tau](0)) < 1e-5);
  }

  // Augmented route agrees under the same input.
  auto ref = arfls_run(m, y, L, KLBudget(0.0), &u);
  for (size_t k = 0; k < out.estimates.size(); ++k)
    CHECK((out.estimates[k].x - ref.out.estimates[k].x).cwiseAbs().maxCoeff() <=
          1e-10);

  // And with a nonzero budget the two implementations still agree.
  auto red_b = rfls_run(m, y, L, KLBudget(1e-3), &u);
  auto ref_b = arfls_run(m, y, L, KLBudget(1e-3), &u);
  for (size_t k = 0; k < red_b.out.estimates.size(); ++k)
    CHECK(rel_dev(red_b.out.estimates[k].x, ref_b.out.estimates[k].x) <= 1e-6);
}

TEST_CASE("worker count does not change the result") {
  StateSpaceModel m = random_model(3, 1, 99, 0.9);
  Rng rng(18);
  auto sim = simulate(m, 60, rng);
  set_num_threads(1);
  auto serial = rfls_run(m, sim.y, 12, KLBudget(1e-3));
  set_num_threads(4);
  auto parallel = rfls_run(m, sim.y, 12, KLBudget(1e-3));
  set_num_threads(0);
  REQUIRE(serial.out.estimates.size() == parallel.out.estimates.size());
  for (size_t k = 0; k < serial.out.estimates.size(); ++k)
    CHECK((serial.out.estimates[k].x - parallel.out.estimates[k].x)
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("combine before the window is filled reports an incomplete window") {
  StateSpaceModel m = scalar_model(0.8, 0.7, 1.0, 0.5);
  RflsSmoother sm(m, 4, KLBudget(0.0));
  sm.step(Vec::Zero(1));
  CHECK_THROWS_AS(sm.combine(3), Error);
}
