#include "rmcst/error.hpp"

namespace rmcst {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::InvalidIndicator: return "InvalidIndicator";
    case ErrorCode::NegativeTime: return "NegativeTime";
    case ErrorCode::EmptyArm: return "EmptyArm";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SeparationDetected: return "SeparationDetected";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::AllUnitsTrimmed: return "AllUnitsTrimmed";
    case ErrorCode::ArmEmptyAfterTrim: return "ArmEmptyAfterTrim";
    case ErrorCode::RefitFailed: return "RefitFailed";
    case ErrorCode::ZeroTotalWeight: return "ZeroTotalWeight";
    case ErrorCode::EmptyRiskSet: return "EmptyRiskSet";
    case ErrorCode::ZeroWeightArm: return "ZeroWeightArm";
    case ErrorCode::NonpositiveL: return "NonpositiveL";
    case ErrorCode::UnsupportedScheme: return "UnsupportedScheme";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::InvalidB: return "InvalidB";
    case ErrorCode::TooManyFailedReplicates: return "TooManyFailedReplicates";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::TruthMissing: return "TruthMissing";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace rmcst
