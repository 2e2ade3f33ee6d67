#pragma once

#include <stdexcept>
#include <string>

namespace mps {

enum class ErrorKind {
  Config,
  DimensionMismatch,
  AntipodalPoint,
  GeometryFailure,
  HypothesisViolated,
  PreconditionOutOfBall,
  FrameTransportFailure,
  CoverFailure,
  FrameDimensionTooSmall,
  SlowDecrease,
  BudgetExceeded,
  SelectionFailure,
  NoConvergence,
  NotSymmetric,
  UnsupportedDimension,
  EigensolverFailure,
  CertificationFailure
};

const char* errorKindName(ErrorKind kind);

// Process exit code for a failure class.
int exitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mps
