#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvtrans {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveDepth,
  BadRange,
  DegenerateGeometry,
  ShapeMismatch,
  EmptyList,
  BadScale,
  DegenerateMask,
  NotSymmetric,
  BackgroundPeak,
  EmptyMesh,
  GenerationExhausted,
  PlacementExhausted,
  TooFewVertices,
  IoError,
  FormatError,
  VersionMismatch,
  EmptyMask,
  CountMismatch,
  BadLabel,
  MissingScene,
  IndexOutOfRange,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyList: return "EmptyList";
    case ErrorCode::BadScale: return "BadScale";
    case ErrorCode::DegenerateMask: return "DegenerateMask";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::BackgroundPeak: return "BackgroundPeak";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::GenerationExhausted: return "GenerationExhausted";
    case ErrorCode::PlacementExhausted: return "PlacementExhausted";
    case ErrorCode::TooFewVertices: return "TooFewVertices";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::MissingScene: return "MissingScene";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
  }
  return "Unknown";
}

/// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace mvtrans
