// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stealthrmt {

enum class ErrorKind {
  MalformedCase,
  NoSlackBus,
  DuplicateBusId,
  RankDeficient,
  ZeroReactanceBranch,
  DegenerateCovariance,
  InsufficientSamples,
  DimensionMismatch,
  SingularMatrix,
  NoConvergence,
  NonpositiveLogArgument,
  DomainError,
  InsufficientTrials,
  UnknownKey,
  OutOfRange,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stealthrmt
