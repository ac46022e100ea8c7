#pragma once

#include <stdexcept>
#include <string>

namespace msrg {

enum class ErrorCode {
  InvalidArgument,
  WindowTooLarge,
  WindowMismatch,
  SizeLimitExceeded,
  NonPositiveInput,
  InvalidConfig,
  IoError,
  NonSquareImage,
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::WindowMismatch: return "WindowMismatch";
    case ErrorCode::SizeLimitExceeded: return "SizeLimitExceeded";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NonSquareImage: return "NonSquareImage";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace msrg
