#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plidar {

enum class ErrorCode {
  kMissingFile,
  kDimensionMismatch,
  kMalformedCalibration,
  kMalformedLine,
  kIoFailure,
  kWindowTooLarge,
  kSizeMismatch,
  kWrongLayer,
  kInvalidParams,
  kEmptyInput,
  kNoValidPixels,
  kMissingCounterpart,
  kConfigError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kMalformedCalibration: return "MalformedCalibration";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kWindowTooLarge: return "WindowTooLarge";
    case ErrorCode::kSizeMismatch: return "SizeMismatch";
    case ErrorCode::kWrongLayer: return "WrongLayer";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNoValidPixels: return "NoValidPixels";
    case ErrorCode::kMissingCounterpart: return "MissingCounterpart";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Library-wide exception. Every failure raised by plidar carries a code so
/// callers (tests, the batch runner) can branch on the kind of failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace plidar
