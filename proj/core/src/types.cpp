#include "detplace/types.hpp"

namespace detplace {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kMissingParameter: return "MissingParameter";
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kNonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::kNonPositiveSusceptance: return "NonPositiveSusceptance";
    case ErrorCode::kAsymmetricEdge: return "AsymmetricEdge";
    case ErrorCode::kBadIndex: return "BadIndex";
    case ErrorCode::kInvalidSigma: return "InvalidSigma";
    case ErrorCode::kCertificateFailed: return "CertificateFailed";
    case ErrorCode::kObserverDesignFailed: return "ObserverDesignFailed";
    case ErrorCode::kForbiddenAgent: return "ForbiddenAgent";
    case ErrorCode::kDegreeOverflow: return "DegreeOverflow";
    case ErrorCode::kEmptyDetectionSet: return "EmptyDetectionSet";
    case ErrorCode::kMethodDisagreement: return "MethodDisagreement";
    case ErrorCode::kPoleAtFilter: return "PoleAtFilter";
    case ErrorCode::kPencilFailure: return "PencilFailure";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kUnboundedRatio: return "UnboundedRatio";
    case ErrorCode::kLPFailure: return "LPFailure";
    case ErrorCode::kInfiniteWorstFrequency: return "InfiniteWorstFrequency";
    case ErrorCode::kStepTooLarge: return "StepTooLarge";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace detplace
