#include "mpsphere/errors.hpp"

namespace mps {

const char* errorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "Config";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::AntipodalPoint: return "AntipodalPoint";
    case ErrorKind::GeometryFailure: return "GeometryFailure";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::PreconditionOutOfBall: return "PreconditionOutOfBall";
    case ErrorKind::FrameTransportFailure: return "FrameTransportFailure";
    case ErrorKind::CoverFailure: return "CoverFailure";
    case ErrorKind::FrameDimensionTooSmall: return "FrameDimensionTooSmall";
    case ErrorKind::SlowDecrease: return "SlowDecrease";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::SelectionFailure: return "SelectionFailure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::EigensolverFailure: return "EigensolverFailure";
    case ErrorKind::CertificationFailure: return "CertificationFailure";
  }
  return "Unknown";
}

int exitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::UnsupportedDimension:
    case ErrorKind::NotSymmetric:
      return 2;
    case ErrorKind::GeometryFailure:
    case ErrorKind::AntipodalPoint:
      return 3;
    case ErrorKind::NoConvergence:
      return 5;
    default:
      return 4;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(errorKindName(kind)) + ": " + what), kind_(kind) {}

}  // namespace mps
