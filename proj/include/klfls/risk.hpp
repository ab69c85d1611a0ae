#pragma once

#include <variant>
#include <vector>

#include "klfls/linalg.hpp"

namespace klfls {

// Per-step mismodeling tolerance c_t >= 0, constant or scheduled.
class KLBudget {
 public:
  KLBudget(double c = 0.0) : value_(c) { check(c); }
  KLBudget(std::vector<double> schedule) : value_(std::move(schedule)) {
    for (double c : std::get<1>(value_)) check(c);
  }

  double at(int t) const {
    if (std::holds_alternative<double>(value_)) return std::get<0>(value_);
    const auto& s = std::get<1>(value_);
    if (t < 0 || t >= static_cast<int>(s.size()))
      fail(ErrorCode::InvalidArgument, "KLBudget: schedule index out of range");
    return s[t];
  }

  bool is_zero() const {
    if (std::holds_alternative<double>(value_)) return std::get<0>(value_) == 0.0;
    for (double c : std::get<1>(value_))
      if (c != 0.0) return false;
    return true;
  }

 private:
  static void check(double c) {
    if (!(c >= 0.0)) fail(ErrorCode::InvalidArgument, "KLBudget: c must be >= 0");
  }
  std::variant<double, std::vector<double>> value_;
};

// Risk sensitivity parameter theta_t = 1/lambda_t solved from
// gamma(theta) = c together with diagnostics of the bisection.
struct ThetaSolution {
  double theta = 0.0;
  double gamma_residual = 0.0;
  double upper_bound = 0.0;  // 1 / r(P^{L,L})
  int iterations = 0;
};

// gamma(P~, theta) = 1/2 [ tr((I - theta H^T H P~)^{-1} - I)
//                          + ln det(I - theta H^T H P~) ]
double gamma_aug(const Mat& P_aug, const Mat& H_sel, double theta);

// Reduced form on the n x n trailing block, Gamma = P_LL - theta^{-1} I:
// gammabar = -1/2 { tr[P_LL Gamma^{-1}] + ln det[I - P_LL Gamma^{-1}] }.
// Agrees with gamma_aug for every theta in range.
double gamma_reduced(const Mat& P_LL, double theta);

// Bisection for gamma_reduced(P_LL, theta) = c on (0, (1-1e-12)/r(P_LL)).
ThetaSolution solve_theta(const Mat& P_LL, double c, double tol = 1e-10);

// V~ = (P~^{-1} - theta H^T H)^{-1} computed in Woodbury form
// V~ = P~ - P~ H^T Gamma^{-1} H P~; the output dominates P~.
Mat risk_update_aug(const Mat& P_aug, const Mat& H_sel, double theta);

}  // namespace klfls
