#include "embloc/error.hpp"

namespace embloc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfImage: return "OutOfImage";
    case ErrorCode::DegenerateDepth: return "DegenerateDepth";
    case ErrorCode::OutOfFrustum: return "OutOfFrustum";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::InvalidDepth: return "InvalidDepth";
    case ErrorCode::DepthOverflow: return "DepthOverflow";
    case ErrorCode::BadVolume: return "BadVolume";
    case ErrorCode::InsufficientDepth: return "InsufficientDepth";
    case ErrorCode::DegenerateObject: return "DegenerateObject";
    case ErrorCode::DegenerateDisplacement: return "DegenerateDisplacement";
    case ErrorCode::DegenerateSegment: return "DegenerateSegment";
    case ErrorCode::BadOffset: return "BadOffset";
    case ErrorCode::EmptyLift: return "EmptyLift";
    case ErrorCode::Unsatisfiable: return "Unsatisfiable";
    case ErrorCode::BadMix: return "BadMix";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::PlacementFailure: return "PlacementFailure";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

InvalidDepthError::InvalidDepthError(int x, int y)
    : Error(ErrorCode::InvalidDepth,
            "depth hole at pixel (" + std::to_string(x) + ", " + std::to_string(y) + ")"),
      x_(x),
      y_(y) {}

RangeViolationError::RangeViolationError(std::size_t tuple_index, const std::string& detail)
    : Error(ErrorCode::RangeViolation,
            "tuple " + std::to_string(tuple_index) + ": " + detail),
      index_(tuple_index) {}

}  // namespace embloc
