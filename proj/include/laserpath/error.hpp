#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace laserpath {

enum class ErrorCode {
  kInvalidArgument,
  kNonPositiveEdge,
  kEmptyIndex,
  kKExceedsSize,
  kTooFewPoints,
  kMissingNormals,
  kNonPositiveRadius,
  kEmptyDescriptors,
  kDegenerateGeometry,
  kInsufficientInliers,
  kNoCorrespondences,
  kNoConstrainedPlane,
  kEmptyCloud,
  kLengthMismatch,
  kNotNeighbors,
  kNoPath,
  kLethalEndpoint,
  kInconsistentState,
  kParseError,
  kEmptyFile,
  kIoError,
  kConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the pipeline; wraps the failing stage's error.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "' failed: " + cause.what()),
        stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace laserpath
