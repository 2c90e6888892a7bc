#include "gscout/error.hpp"

namespace gscout {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kSingularTransform: return "SingularTransform";
    case ErrorCode::kBadRadiusRange: return "BadRadiusRange";
    case ErrorCode::kNoRobustTransform: return "NoRobustTransform";
    case ErrorCode::kNothingToRun: return "NothingToRun";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace gscout
