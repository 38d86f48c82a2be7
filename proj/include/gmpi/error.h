// Copyright Contributors to the gmpi-toolkit Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gmpi {

enum class ErrorKind {
  InvalidArgument,
  InvalidRange,
  DegenerateRange,
  PlaneBehindCamera,
  SingularIntrinsics,
  EmptyPlaneList,
  DegenerateMask,
  MissingResolution,
  ZeroVariance,
  InvalidConfig,
  InvalidContainer,
  UnknownKind,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-checkable kind next
/// to the human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gmpi
