#pragma once

#include <limits>

#include "klfls/linalg.hpp"

namespace klfls {

// Collects positivity/dominance statistics of the covariance recursions:
// min eigenvalue of every V~_t and P~_t seen, the most negative eigenvalue
// of V~ - P~, and the worst symmetry deviation of assembled blocks.
struct PositivityMonitor {
  double min_eig_V = std::numeric_limits<double>::infinity();
  double min_eig_P = std::numeric_limits<double>::infinity();
  double min_eig_V_minus_P = std::numeric_limits<double>::infinity();
  double max_asymmetry = 0.0;
  long steps = 0;

  void record(const Mat& V, const Mat& P) {
    min_eig_V = std::min(min_eig_V, min_eig(V));
    min_eig_P = std::min(min_eig_P, min_eig(P));
    min_eig_V_minus_P = std::min(min_eig_V_minus_P, min_eig(V - P));
    max_asymmetry = std::max(max_asymmetry,
                             (V - V.transpose()).cwiseAbs().maxCoeff());
    max_asymmetry = std::max(max_asymmetry,
                             (P - P.transpose()).cwiseAbs().maxCoeff());
    ++steps;
  }

  bool positive() const { return min_eig_V > 0.0 && min_eig_P > 0.0; }
};

}  // namespace klfls
