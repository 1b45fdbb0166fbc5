#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rmcst {

enum class ErrorCode {
  InvalidArgument,
  IoError,
  MissingColumn,
  NonNumericCell,
  InvalidIndicator,
  NegativeTime,
  EmptyArm,
  DimensionMismatch,
  SeparationDetected,
  SingularDesign,
  NoConvergence,
  SingularInformation,
  AllUnitsTrimmed,
  ArmEmptyAfterTrim,
  RefitFailed,
  ZeroTotalWeight,
  EmptyRiskSet,
  ZeroWeightArm,
  NonpositiveL,
  UnsupportedScheme,
  DegenerateVariance,
  InvalidB,
  TooManyFailedReplicates,
  RootNotBracketed,
  TruthMissing,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace rmcst
