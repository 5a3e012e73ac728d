#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tafp {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionNotMultiple,
  kOutOfBounds,
  kUnplacedEndpoint,
  kUnknownMaterial,
  kCollision,
  kUnstableTimeStep,
  kSingularSystem,
  kObjectiveMismatch,
  kGenomeMismatch,
  kLengthMismatch,
  kNoSolution,
  kInsufficientCandidates,
  kUncoveredUnit,
  kStageDependency,
  kSelectionUnsatisfiable,
  kMissingArtifact,
  kInfeasibleArea,
  kInfeasibleFloorplan,
  kParse,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tafp
