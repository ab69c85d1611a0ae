#include "klfls/model.hpp"

#include <nlohmann/json.hpp>

namespace klfls {

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    fail(ErrorCode::InvalidArgument, "expected a nested array");
  Mat m(j.size(), j[0].size());
  for (int i = 0; i < m.rows(); ++i) {
    if (static_cast<int>(j[i].size()) != m.cols())
      fail(ErrorCode::InvalidArgument, "ragged matrix rows in JSON");
    for (int k = 0; k < m.cols(); ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

}  // namespace

const StateSpaceModel& validate_model(const StateSpaceModel& m) {
  const int n = m.n, mm = m.m;
  if (m.A.rows() != n || m.A.cols() != n || m.B.rows() != n ||
      m.B.cols() != mm + n || m.C.rows() != mm || m.C.cols() != n ||
      m.D.rows() != mm || m.D.cols() != mm + n ||
      m.x0_mean.size() != n || m.V0.rows() != n || m.V0.cols() != n)
    fail(ErrorCode::InvalidArgument, "validate_model: inconsistent dimensions");
  if (numeric_rank(m.B) != n)
    fail(ErrorCode::RankDeficientB, "validate_model: rank(B) < n");
  if (numeric_rank(m.D) != mm)
    fail(ErrorCode::RankDeficientD, "validate_model: rank(D) < m");
  double coupling = (m.B * m.D.transpose()).cwiseAbs().maxCoeff();
  if (coupling > 1e-12)
    fail(ErrorCode::CouplingViolation, "validate_model: B D^T != 0");
  if (min_eig(m.V0) <= 0.0)
    fail(ErrorCode::NonPDInitialCovariance,
         "validate_model: V0 is not positive definite");
  return m;
}

AugmentedModel build_augmented(const StateSpaceModel& m, int lag) {
  if (lag < 1) fail(ErrorCode::InvalidLag, "build_augmented: lag must be >= 1");
  const int n = m.n, a = (lag + 1) * n;
  AugmentedModel aug;
  aug.lag = lag;
  aug.base = m;
  aug.A_aug = Mat::Zero(a, a);
  aug.A_aug.topLeftCorner(n, n) = m.A;
  for (int j = 1; j <= lag; ++j)
    aug.A_aug.block(j * n, (j - 1) * n, n, n) = Mat::Identity(n, n);
  aug.B_aug = Mat::Zero(a, m.m + n);
  aug.B_aug.topRows(n) = m.B;
  aug.C_aug = Mat::Zero(m.m, a);
  aug.C_aug.leftCols(n) = m.C;
  aug.D_aug = m.D;
  aug.H_sel = Mat::Zero(n, a);
  aug.H_sel.rightCols(n) = Mat::Identity(n, n);
  return aug;
}

Mat augmented_initial_cov(const StateSpaceModel& m, int lag, double filler) {
  const int n = m.n;
  Mat v = Mat::Identity((lag + 1) * n, (lag + 1) * n) * filler;
  v.topLeftCorner(n, n) = m.V0;
  return v;
}

Vec augmented_initial_mean(const StateSpaceModel& m, int lag) {
  Vec xi = Vec::Zero((lag + 1) * m.n);
  xi.head(m.n) = m.x0_mean;
  return xi;
}

StateSpaceModel make_singer(double T, double sigma2_m, double alpha,
                            const Mat& r_meas) {
  if (T <= 0 || sigma2_m <= 0 || alpha <= 0)
    fail(ErrorCode::InvalidArgument, "make_singer: T, sigma2_m, alpha must be > 0");
  if (r_meas.rows() != 2 || r_meas.cols() != 2 || min_eig(r_meas) <= 0)
    fail(ErrorCode::InvalidArgument, "make_singer: r_meas must be 2x2 SPD");

  StateSpaceModel m;
  m.n = 4;
  m.m = 2;
  m.A = Mat::Identity(4, 4);
  m.A(0, 1) = T;
  m.A(2, 3) = T;

  const double q = 2.0 * alpha * sigma2_m;
  Mat axis(2, 2);
  axis << T * T * T / 3.0, T * T / 2.0, T * T / 2.0, T;
  Mat Q = Mat::Zero(4, 4);
  Q.topLeftCorner(2, 2) = q * axis;
  Q.bottomRightCorner(2, 2) = q * axis;

  Eigen::LLT<Mat> lltQ(Q);
  if (lltQ.info() != Eigen::Success)
    fail(ErrorCode::NonPDProcessCovariance,
         "make_singer: process covariance factorization failed");
  Eigen::LLT<Mat> lltR(r_meas);
  if (lltR.info() != Eigen::Success)
    fail(ErrorCode::NonPDProcessCovariance,
         "make_singer: measurement covariance factorization failed");

  m.B = Mat::Zero(4, 6);
  m.B.leftCols(4) = lltQ.matrixL();
  m.C = Mat::Zero(2, 4);
  m.C(0, 0) = 1.0;
  m.C(1, 2) = 1.0;
  m.D = Mat::Zero(2, 6);
  m.D.rightCols(2) = lltR.matrixL();
  m.x0_mean = Vec::Zero(4);
  Vec v0(4);
  v0 << 50, 5, 50, 5;
  m.V0 = v0.asDiagonal();
  return validate_model(m);
}

StateSpaceModel random_model(int n, int m, std::uint64_t seed,
                             double target_radius) {
  if (n < 1 || m < 1 || target_radius <= 0 || target_radius >= 1)
    fail(ErrorCode::InvalidArgument, "random_model: bad arguments");
  Rng rng(seed);
  const int w = m + n;
  for (int attempt = 0; attempt < 32; ++attempt) {
    Mat A(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = rng.uniform();
    double rho = spectral_radius(A);
    if (rho < 1e-12) continue;
    A *= target_radius / rho;

    Mat B0(n, w), D(m, w);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < w; ++j) B0(i, j) = rng.uniform();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j) D(i, j) = rng.uniform();
    if (numeric_rank(D) != m) continue;
    // Project B rows onto the orthogonal complement of D's row space.
    Mat proj = D.transpose() * spd_solve(D * D.transpose(), D);
    Mat B = B0 * (Mat::Identity(w, w) - proj);
    if (numeric_rank(B) != n) continue;

    StateSpaceModel mdl;
    mdl.n = n;
    mdl.m = m;
    mdl.A = A;
    mdl.B = B;
    mdl.C = Mat(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) mdl.C(i, j) = rng.uniform();
    mdl.D = D;
    mdl.x0_mean = Vec::Zero(n);
    mdl.V0 = Mat::Identity(n, n);
    return validate_model(mdl);
  }
  fail(ErrorCode::RankDeficientB,
       "random_model: could not realize full-rank B after bounded retries");
}

Simulation simulate(const StateSpaceModel& m, int N, Rng& rng, const Vec* x0) {
  Simulation sim;
  sim.x.reserve(N + 2);
  sim.y.reserve(N + 1);
  Vec x = x0 ? *x0 : m.x0_mean;
  sim.x.push_back(x);
  for (int t = 0; t <= N; ++t) {
    Vec v(m.m + m.n);
    for (int i = 0; i < v.size(); ++i) v(i) = rng.gaussian();
    sim.y.push_back(m.C * x + m.D * v);
    x = m.A * x + m.B * v;
    sim.x.push_back(x);
  }
  return sim;
}

std::string model_to_json(const StateSpaceModel& m) {
  json j;
  j["A"] = mat_to_json(m.A);
  j["B"] = mat_to_json(m.B);
  j["C"] = mat_to_json(m.C);
  j["D"] = mat_to_json(m.D);
  json x0 = json::array();
  for (int i = 0; i < m.x0_mean.size(); ++i) x0.push_back(m.x0_mean(i));
  j["x0"] = x0;
  j["V0"] = mat_to_json(m.V0);
  return j.dump(2);
}

StateSpaceModel model_from_json(const std::string& text) {
  json j = json::parse(text);
  StateSpaceModel m;
  m.A = mat_from_json(j.at("A"));
  m.B = mat_from_json(j.at("B"));
  m.C = mat_from_json(j.at("C"));
  m.D = mat_from_json(j.at("D"));
  m.n = static_cast<int>(m.A.rows());
  m.m = static_cast<int>(m.C.rows());
  const auto& x0 = j.at("x0");
  m.x0_mean = Vec(x0.size());
  for (int i = 0; i < m.x0_mean.size(); ++i) m.x0_mean(i) = x0[i].get<double>();
  m.V0 = mat_from_json(j.at("V0"));
  return validate_model(m);
}

}  // namespace klfls
