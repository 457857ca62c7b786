// SPDX-License-Identifier: Apache-2.0
#include "stealthrmt/error.hpp"

namespace stealthrmt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedCase: return "MalformedCase";
    case ErrorKind::NoSlackBus: return "NoSlackBus";
    case ErrorKind::DuplicateBusId: return "DuplicateBusId";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::ZeroReactanceBranch: return "ZeroReactanceBranch";
    case ErrorKind::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NonpositiveLogArgument: return "NonpositiveLogArgument";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::InsufficientTrials: return "InsufficientTrials";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace stealthrmt
