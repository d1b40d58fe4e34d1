#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lightcal {

enum class ErrorCode {
  InvalidArgument,
  NonConvergence,
  RayParallelToPlane,
  IntersectionBehindCamera,
  DegenerateQuad,
  LightOnPlane,
  ZeroDistance,
  InsufficientValidPixels,
  DegenerateDataset,
  ParseError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::RayParallelToPlane: return "RayParallelToPlane";
    case ErrorCode::IntersectionBehindCamera: return "IntersectionBehindCamera";
    case ErrorCode::DegenerateQuad: return "DegenerateQuad";
    case ErrorCode::LightOnPlane: return "LightOnPlane";
    case ErrorCode::ZeroDistance: return "ZeroDistance";
    case ErrorCode::InsufficientValidPixels: return "InsufficientValidPixels";
    case ErrorCode::DegenerateDataset: return "DegenerateDataset";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Input-side failures (bad files, malformed fields) as opposed to numerical ones.
inline bool is_input_error(ErrorCode code) noexcept {
  return code == ErrorCode::InvalidArgument || code == ErrorCode::ParseError ||
         code == ErrorCode::IoError;
}

}  // namespace lightcal
