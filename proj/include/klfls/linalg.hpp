#pragma once

#include <Eigen/Dense>

#include "klfls/error.hpp"

namespace klfls {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat sym(const Mat& a) { return 0.5 * (a + a.transpose()); }

inline double min_eig(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double max_eig(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(a.rows() - 1);
}

inline bool is_spd(const Mat& a) {
  if (a.rows() != a.cols()) return false;
  return min_eig(a) > 0.0;
}

// Largest |eigenvalue| of a general square matrix.
inline double spectral_radius(const Mat& a) {
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Rank via singular values > 1e-10 * sigma_max.
inline int numeric_rank(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0;
  double tol = 1e-10 * s(0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tol) ++r;
  return r;
}

// X = A^{-1} B for symmetric positive definite A.
inline Mat spd_solve(const Mat& a, const Mat& b) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NonPDInput, "spd_solve: matrix is not positive definite");
  return llt.solve(b);
}

inline double logdet_spd(const Mat& a) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NonPDInput, "logdet_spd: matrix is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// log det of a general square matrix with positive determinant.
inline double logdet_posdet(const Mat& a) {
  Eigen::PartialPivLU<Mat> lu(a);
  double logabs = 0.0;
  double sign = lu.permutationP().determinant();
  for (int i = 0; i < a.rows(); ++i) {
    double u = lu.matrixLU()(i, i);
    if (u < 0) sign = -sign;
    logabs += std::log(std::abs(u));
  }
  if (sign <= 0)
    fail(ErrorCode::NonPDInput, "logdet_posdet: determinant is not positive");
  return logabs;
}

}  // namespace klfls
