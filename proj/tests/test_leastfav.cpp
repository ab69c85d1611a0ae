#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "klfls/arfls.hpp"
#include "klfls/leastfav.hpp"
#include "klfls/nominal.hpp"
#include "klfls/rfls.hpp"

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

}  // namespace

TEST_CASE("zero thetas collapse the adversary to the nominal model") {
  StateSpaceModel m = random_model(2, 1, 8, 0.9);
  const int L = 3, N = 40;
  auto sched = rfls_schedule(m, L, KLBudget(0.0), N);
  AugmentedModel aug = build_augmented(m, L);
  LeastFavorableModel lf = backward_recursion(aug, sched.gains, sched.thetas);

  const int w = m.m + m.n;
  for (int t = 0; t <= N; ++t) {
    CHECK(lf.S[t].cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((lf.K_v(t) - Mat::Identity(w, w)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((lf.Lfact[t] - Mat::Identity(w, w)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // Assembled block form matches the nominal augmentation.
  Mat Ab = lf.Abar(0);
  const int a = aug.dim();
  CHECK((Ab.topLeftCorner(a, a) - aug.A_aug).cwiseAbs().maxCoeff() == 0.0);
  CHECK(Ab.topRightCorner(a, a).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(Ab.bottomLeftCorner(a, a).cwiseAbs().maxCoeff() == 0.0);
  CHECK((lf.Cbar(0).leftCols(a) - aug.C_aug).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-step horizon, scalar system, hand arithmetic") {
  const double A = 0.7, b = 0.9, C = 1.2, d = 0.5;
  StateSpaceModel m = scalar_model(A, b, C, d);
  AugmentedModel aug = build_augmented(m, 1);

  const double g0 = 0.31, g1 = 0.27, theta = 0.4;
  Mat G(2, 1);
  G << g0, g1;
  LeastFavorableModel lf = backward_recursion(aug, {G}, {theta});

  // W^{-1} = diag(0, theta); Bg = [[b, -g0 d], [0, -g1 d]].
  const double kdenom = 1.0 - theta * g1 * g1 * d * d;
  Mat K_expected = Mat::Identity(2, 2);
  K_expected(1, 1) = 1.0 / kdenom;
  CHECK((lf.K_v(0) - K_expected).cwiseAbs().maxCoeff() < 1e-12);

  Mat S_expected = Mat::Zero(2, 2);
  S_expected(1, 0) = -theta * g1 * d * (1.0 - g1 * C) / kdenom;
  CHECK((lf.S[0] - S_expected).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(lf.Lfact[0](1, 1) == doctest::Approx(1.0 / std::sqrt(kdenom)).epsilon(1e-12));
}

TEST_CASE("backward recursion against a dense transliteration") {
  StateSpaceModel m = random_model(2, 1, 17, 0.9);
  const int L = 2, N = 6;
  auto sched = rfls_schedule(m, L, KLBudget(5e-3), N);
  AugmentedModel aug = build_augmented(m, L);
  LeastFavorableModel lf = backward_recursion(aug, sched.gains, sched.thetas);

  const int a = aug.dim(), w = m.m + m.n;
  Mat HtH = aug.H_sel.transpose() * aug.H_sel;
  Mat omega_inv = Mat::Zero(a, a);
  for (int t = N; t >= 0; --t) {
    Mat winv = omega_inv + sched.thetas[t] * HtH;
    Mat Bg = aug.B_aug - sched.gains[t] * aug.D_aug;
    Mat Ag = aug.A_aug - sched.gains[t] * aug.C_aug;
    Mat K = (Mat::Identity(w, w) - Bg.transpose() * winv * Bg).inverse();
    Mat S = K * Bg.transpose() * winv * Ag;
    omega_inv = Ag.transpose() * winv * Ag + S.transpose() * K.inverse() * S;
    CHECK((lf.K_v(t) - K).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((lf.S[t] - S).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("per-step KL of the distorted transition equals the budget") {
  StateSpaceModel singer = make_singer(0.01, 5.0, 2.0, Mat::Identity(2, 2));
  const int L = 20, N = 100;
  const double c = 1e-3;
  AugmentedModel aug = build_augmented(singer, L);
  ArflsSmoother sm(aug, KLBudget(c));
  Vec y0 = Vec::Zero(2);
  double worst = 0.0;
  for (int t = 0; t <= N; ++t) {
    Mat Vt = sm.V_aug();
    auto st = sm.step(y0);
    worst = std::max(worst,
                     std::abs(kl_check(aug, sm.gain(), Vt, sm.P_next(), st.theta) - c));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("kl_check: zero at theta 0, matches gamma elsewhere") {
  StateSpaceModel m = scalar_model(0.8, 0.6, 1.0, 0.7);
  AugmentedModel aug = build_augmented(m, 1);
  ArflsSmoother sm(aug, KLBudget(0.0));
  Mat Vt = sm.V_aug();
  sm.step(Vec::Zero(1));
  CHECK(kl_check(aug, sm.gain(), Vt, sm.P_next(), 0.0) == doctest::Approx(0.0));

  // Nonzero theta: the UDL route reproduces gamma(P~, theta), and a direct
  // dense KL evaluation agrees.
  Mat P = sm.P_next();
  double r = max_eig(aug.H_sel * P * aug.H_sel.transpose());
  double theta = 0.4 / r;
  double kl = kl_check(aug, sm.gain(), Vt, P, theta);
  CHECK(kl == doctest::Approx(gamma_aug(P, aug.H_sel, theta)).epsilon(1e-10));

  Mat S = aug.C_aug * Vt * aug.C_aug.transpose() +
          aug.D_aug * aug.D_aug.transpose();
  Mat U = Mat::Identity(3, 3);
  U.topRightCorner(2, 1) = sm.gain();
  Mat mid = Mat::Zero(3, 3);
  mid.topLeftCorner(2, 2) = P;
  mid.bottomRightCorner(1, 1) = S;
  Mat K = U * mid * U.transpose();
  mid.topLeftCorner(2, 2) = risk_update_aug(P, aug.H_sel, theta);
  Mat K0 = U * mid * U.transpose();
  double direct =
      0.5 * ((K.inverse() * K0).trace() - 3.0 - std::log(K0.determinant() / K.determinant()));
  CHECK(kl == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("reduced model reproduces the full simulation under shared noise") {
  StateSpaceModel m = random_model(2, 1, 23, 0.9);
  const int L = 4, N = 60;
  auto sched = rfls_schedule(m, L, KLBudget(2e-3), N);
  AugmentedModel aug = build_augmented(m, L);
  LeastFavorableModel lf = backward_recursion(aug, sched.gains, sched.thetas);

  auto full = lf_simulate(lf, 99, LfInit::RandomPrior);
  auto reduced = lf_reduce(lf).simulate(99, LfInit::RandomPrior);
  for (int t = 0; t <= N; ++t) {
    CHECK((full.y[t] - reduced.y[t]).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((full.x[t] - reduced.x[t]).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("adversarial noise covariance dominates the identity") {
  StateSpaceModel m = random_model(2, 1, 29, 0.9);
  const int L = 3, N = 50;
  auto sched = rfls_schedule(m, L, KLBudget(5e-3), N);
  AugmentedModel aug = build_augmented(m, L);
  LeastFavorableModel lf = backward_recursion(aug, sched.gains, sched.thetas);
  auto trace = evaluate_gains(lf, GainSchedule{sched.gains, L});
  const int w = m.m + m.n;
  for (const auto& R : trace.rtilde)
    CHECK(min_eig(R - Mat::Identity(w, w)) >= -1e-10);
  // K_v dominates the identity, strictly where theta has influence.
  for (int t = 0; t <= N; ++t)
    CHECK(min_eig(lf.K_v(t) - Mat::Identity(w, w)) >= -1e-12);
}

TEST_CASE("lf simulation is deterministic per seed") {
  StateSpaceModel m = random_model(2, 1, 37, 0.9);
  auto sched = rfls_schedule(m, 3, KLBudget(1e-3), 30);
  AugmentedModel aug = build_augmented(m, 3);
  LeastFavorableModel lf = backward_recursion(aug, sched.gains, sched.thetas);
  auto s1 = lf_simulate(lf, 7);
  auto s2 = lf_simulate(lf, 7);
  auto s3 = lf_simulate(lf, 8);
  double same = 0.0, diff = 0.0;
  for (int t = 0; t <= 30; ++t) {
    same = std::max(same, (s1.y[t] - s2.y[t]).cwiseAbs().maxCoeff());
    diff = std::max(diff, (s1.y[t] - s3.y[t]).cwiseAbs().maxCoeff());
  }
  CHECK(same == 0.0);
  CHECK(diff > 0.0);
}

TEST_CASE("zero-budget simulation is statistically nominal") {
  StateSpaceModel singer = make_singer(0.01, 5.0, 2.0, Mat::Identity(2, 2));
  const int L = 20, N = 500;
  auto sched = rfls_schedule(singer, L, KLBudget(0.0), N);
  AugmentedModel aug = build_augmented(singer, L);
  LeastFavorableModel lf = backward_recursion(aug, sched.gains, sched.thetas);
  auto sim = lf_simulate(lf, 123, LfInit::RandomPrior);

  // Normalized innovation sum from the nominal forward filter is
  // chi-square with m(N+1) degrees of freedom; check the 99% band.
  Mat P = singer.V0;
  Vec x = singer.x0_mean;
  Mat R = singer.D * singer.D.transpose();
  Mat Q = singer.B * singer.B.transpose();
  double nis = 0.0;
  for (int t = 0; t <= N; ++t) {
    Mat S = singer.C * P * singer.C.transpose() + R;
    Vec innov = sim.y[t] - singer.C * x;
    nis += innov.dot(S.llt().solve(innov));
    Mat K = P * singer.C.transpose() * S.inverse();
    x = singer.A * (x + K * innov);
    P = singer.A * (P - K * singer.C * P) * singer.A.transpose() + Q;
  }
  const double df = 2.0 * (N + 1);
  const double band = 2.58 * std::sqrt(2.0 * df);
  CHECK(nis > df - band);
  CHECK(nis < df + band);
}

TEST_CASE("lyapunov trace equals brute-force propagation, scalar N=2") {
  StateSpaceModel m = scalar_model(0.8, 0.9, 1.0, 0.8);
  const int L = 1, N = 2;
  auto sched = rfls_schedule(m, L, KLBudget(1e-2), N);
  AugmentedModel aug = build_augmented(m, L);
  LeastFavorableModel lf = backward_recursion(aug, sched.gains, sched.thetas);
  GainSchedule gsched{sched.gains, L};
  EvaluateOptions opts;
  opts.keep_full = true;
  auto trace = evaluate_gains(lf, gsched, opts);

  // Explicit stacked propagation through the assembled error system.
  const int a = aug.dim();
  Mat V0 = augmented_initial_cov(m, L);
  Mat Pi = Mat::Zero(2 * a, 2 * a);
  Pi.topLeftCorner(a, a) = V0;
  Pi.topRightCorner(a, a) = V0;
  Pi.bottomLeftCorner(a, a) = V0;
  Pi.bottomRightCorner(a, a) = V0;
  for (int t = 0; t <= N; ++t) {
    CHECK((trace.full_Pi[t] - Pi).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(trace.variance[t] ==
          doctest::Approx(Pi.block(a - m.n, a - m.n, m.n, m.n).trace())
              .epsilon(1e-12));
    Mat stack = Mat::Zero(2 * a, m.m);
    stack.topRows(a) = sched.gains[t];
    Mat F = lf.Abar(t) - stack * lf.Cbar(t);
    Mat G = lf.Bbar(t) - stack * lf.Dbar(t);
    Pi = F * Pi * F.transpose() + G * G.transpose();
  }
  CHECK((trace.full_Pi[N + 1] - Pi).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("zero-budget adversary treats both schedules identically") {
  StateSpaceModel m = random_model(2, 1, 41, 0.9);
  const int L = 3, N = 40;
  auto robust = rfls_schedule(m, L, KLBudget(0.0), N);
  AugmentedModel aug = build_augmented(m, L);
  LeastFavorableModel lf = backward_recursion(aug, robust.gains, robust.thetas);
  auto tr1 = evaluate_gains(lf, GainSchedule{robust.gains, L});
  auto tr2 = evaluate_gains(lf, GainSchedule{robust.gains, L});
  for (size_t t = 0; t < tr1.variance.size(); ++t)
    CHECK(tr1.variance[t] == tr2.variance[t]);
}

TEST_CASE("variance ordering under the adversary, short horizon") {
  StateSpaceModel singer = make_singer(0.01, 5.0, 2.0, Mat::Identity(2, 2));
  const int L = 20, N = 200;
  const double c = 1e-3;
  auto robust = rfls_schedule(singer, L, KLBudget(c), N);
  auto standard = rfls_schedule(singer, L, KLBudget(0.0), N);
  AugmentedModel aug = build_augmented(singer, L);
  LeastFavorableModel lf = backward_recursion(aug, robust.gains, robust.thetas);
  auto tr_r = evaluate_gains(lf, GainSchedule{robust.gains, L});
  auto tr_f = evaluate_gains(lf, GainSchedule{standard.gains, L});
  for (int t = 50; t <= N; ++t) CHECK(tr_r.variance[t] <= tr_f.variance[t]);
}

TEST_CASE("json export carries the per-step factors") {
  StateSpaceModel m = random_model(2, 1, 53, 0.9);
  auto sched = rfls_schedule(m, 2, KLBudget(1e-3), 5);
  AugmentedModel aug = build_augmented(m, 2);
  LeastFavorableModel lf = backward_recursion(aug, sched.gains, sched.thetas);
  auto j = nlohmann::json::parse(lf_to_json(lf));
  CHECK(j["horizon"] == 5);
  CHECK(j["lag"] == 2);
  CHECK(j["steps"].size() == 6);
  CHECK(j["steps"][0].contains("S"));
  CHECK(j["steps"][0].contains("Lfact"));
}

TEST_CASE("schedule length mismatch is rejected") {
  StateSpaceModel m = random_model(2, 1, 61, 0.9);
  AugmentedModel aug = build_augmented(m, 2);
  std::vector<Mat> gains(3, Mat::Zero(6, 1));
  std::vector<double> thetas(2, 0.0);
  CHECK_THROWS_AS(backward_recursion(aug, gains, thetas), Error);
}
