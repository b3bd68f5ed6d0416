#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace embloc {

enum class ErrorCode {
  InvalidArgument,
  OutOfImage,
  DegenerateDepth,
  OutOfFrustum,
  BehindCamera,
  InvalidDepth,
  DepthOverflow,
  BadVolume,
  InsufficientDepth,
  DegenerateObject,
  DegenerateDisplacement,
  DegenerateSegment,
  BadOffset,
  EmptyLift,
  Unsatisfiable,
  BadMix,
  ParseFailure,
  RangeViolation,
  PlacementFailure,
  Io,
  Format,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Raised when an operation touches a depth hole.
class InvalidDepthError : public Error {
 public:
  InvalidDepthError(int x, int y);

  int x() const noexcept { return x_; }
  int y() const noexcept { return y_; }

 private:
  int x_;
  int y_;
};

/// A syntactically valid point list with a coordinate outside its range.
class RangeViolationError : public Error {
 public:
  RangeViolationError(std::size_t tuple_index, const std::string& detail);

  std::size_t tuple_index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace embloc
