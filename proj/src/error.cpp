#include "laserpath/error.hpp"

namespace laserpath {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNonPositiveEdge: return "NonPositiveEdge";
    case ErrorCode::kEmptyIndex: return "EmptyIndex";
    case ErrorCode::kKExceedsSize: return "KExceedsSize";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kMissingNormals: return "MissingNormals";
    case ErrorCode::kNonPositiveRadius: return "NonPositiveRadius";
    case ErrorCode::kEmptyDescriptors: return "EmptyDescriptors";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kInsufficientInliers: return "InsufficientInliers";
    case ErrorCode::kNoCorrespondences: return "NoCorrespondences";
    case ErrorCode::kNoConstrainedPlane: return "NoConstrainedPlane";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNotNeighbors: return "NotNeighbors";
    case ErrorCode::kNoPath: return "NoPath";
    case ErrorCode::kLethalEndpoint: return "LethalEndpoint";
    case ErrorCode::kInconsistentState: return "InconsistentState";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace laserpath
