#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace vrec {

enum class ErrorCode {
  kInvalidArgument,
  kBothAbsent,
  kAbsentInput,
  kDivergentUndistortion,
  kNonPositiveHeight,
  kEmptySplit,
  kDegenerateLabels,
  kUnregisteredFrame,
  kSingularBundle,
  kTooFewInliers,
  kInsufficientViews,
  kLargeResidual,
  kUnsupportedModel,
  kMalformedLine,
  kMalformedPose,
  kSchemaViolation,
  kMissingClip,
  kDegenerateSpec,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this type. Parse failures carry
// their location (line number or JSON pointer) inside the message and in
// location().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string location = {})
      : std::runtime_error(location.empty() ? message
                                            : location + ": " + message),
        code_(code),
        location_(std::move(location)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& location() const noexcept { return location_; }

 private:
  ErrorCode code_;
  std::string location_;
};

}  // namespace vrec
