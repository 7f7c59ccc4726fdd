#include "reloc/error.hpp"

namespace reloc {

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::ParseError:
    case ErrorCode::MissingDepth:
    case ErrorCode::IntrinsicsMismatch:
      return ErrorCategory::Io;
    case ErrorCode::AngleNearPi:
    case ErrorCode::ZeroNormEmbedding:
    case ErrorCode::NonFiniteLoss:
    case ErrorCode::NonFiniteCost:
    case ErrorCode::SingularNormalEquations:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Validation;
  }
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingDepth: return "MissingDepth";
    case ErrorCode::IntrinsicsMismatch: return "IntrinsicsMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::MarginViolation: return "MarginViolation";
    case ErrorCode::NoSeedFeatures: return "NoSeedFeatures";
    case ErrorCode::EmptyPatchSet: return "EmptyPatchSet";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonPositiveEta: return "NonPositiveEta";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TimestampMismatch: return "TimestampMismatch";
    case ErrorCode::AngleNearPi: return "AngleNearPi";
    case ErrorCode::ZeroNormEmbedding: return "ZeroNormEmbedding";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::NonFiniteCost: return "NonFiniteCost";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace reloc
