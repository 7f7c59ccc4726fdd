#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reloc {

enum class ErrorCode {
  // io / parse
  Io,
  ParseError,
  MissingDepth,
  IntrinsicsMismatch,
  // validation
  InvalidArgument,
  InvalidSpec,
  ResolutionMismatch,
  MarginViolation,
  NoSeedFeatures,
  EmptyPatchSet,
  DanglingEdge,
  DimMismatch,
  NonPositiveEta,
  EmptyWindow,
  IndexOutOfRange,
  NonPositiveDepth,
  LengthMismatch,
  TimestampMismatch,
  // numeric
  AngleNearPi,
  ZeroNormEmbedding,
  NonFiniteLoss,
  NonFiniteCost,
  SingularNormalEquations,
};

enum class ErrorCategory { Io, Validation, Numeric };

[[nodiscard]] ErrorCategory category(ErrorCode code) noexcept;
[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Exception type thrown by every module. The code identifies the failure
/// class; the message carries context (file, line, pair index, step, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace reloc
