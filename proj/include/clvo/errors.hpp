#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clvo {

// Coarse error classes. The CLI maps them to exit codes 1/2/3.
enum class ErrorClass { kUsage, kData, kNumerical };

enum class ErrorCode {
  kAngleNearPi,
  kLengthMismatch,
  kDegenerateGeometry,
  kEmptyInput,
  kTooShort,
  kTooFewSequences,
  kKeyMismatch,
  kShapeMismatch,
  kNegativeLoss,
  kUnknownLevel,
  kUnderfull,
  kNonFiniteGradient,
  kNonFiniteLoss,
  kMalformedLine,
  kNonMonotonicTimestamps,
  kBadQuaternion,
  kMissingColumns,
  kConfig,
  kIo,
  kInvalidArgument,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAngleNearPi: return "AngleNearPi";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kTooFewSequences: return "TooFewSequences";
    case ErrorCode::kKeyMismatch: return "KeyMismatch";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNegativeLoss: return "NegativeLoss";
    case ErrorCode::kUnknownLevel: return "UnknownLevel";
    case ErrorCode::kUnderfull: return "Underfull";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kNonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::kBadQuaternion: return "BadQuaternion";
    case ErrorCode::kMissingColumns: return "MissingColumns";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

inline ErrorClass error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAngleNearPi:
    case ErrorCode::kDegenerateGeometry:
    case ErrorCode::kNonFiniteGradient:
    case ErrorCode::kNonFiniteLoss:
      return ErrorClass::kNumerical;
    case ErrorCode::kConfig:
      return ErrorClass::kUsage;
    default:
      return ErrorClass::kData;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept { return clvo::error_class(code_); }

 private:
  ErrorCode code_;
};

}  // namespace clvo
