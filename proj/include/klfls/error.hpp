#pragma once

#include <stdexcept>
#include <string>

namespace klfls {

enum class ErrorCode {
  RankDeficientB,
  RankDeficientD,
  CouplingViolation,
  NonPDInitialCovariance,
  NonPDProcessCovariance,
  InvalidLag,
  InsufficientData,
  ThetaOutOfRange,
  NonPDInput,
  NoConvergence,
  BlockInconsistency,
  WindowIncomplete,
  DistortionSingular,
  DimensionMismatch,
  SingularNoiseCovariance,
  InvalidArgument,
  IoError,
};

// Single exception type carrying a machine-checkable code; tests match on
// the code, messages are for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace klfls
