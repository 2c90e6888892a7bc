#pragma once

#include <stdexcept>
#include <string>

namespace gscout {

enum class ErrorCode {
  kImageTooSmall,
  kSingularTransform,
  kBadRadiusRange,
  kNoRobustTransform,
  kNothingToRun,
  kConfig,
  kIo,
  kInvalidArgument,
};

const char* to_string(ErrorCode code);

// Thrown for contract violations and unrecoverable stage failures. Soft
// outcomes (no evidence, fallback paths) are reported through result flags.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gscout
