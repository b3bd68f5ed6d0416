#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embloc/camera.hpp"

namespace embloc {

using PointList = std::vector<PointTarget>;

/// Extracts the first well-formed list
///   '[' ( '(' int ',' int ',' int ')' ( ',' '(' int ',' int ',' int ')' )* )? ']'
/// (whitespace allowed between tokens, integers are unsigned decimal) from
/// free-form model output. Anything outside that list is ignored.
/// Throws Error(ParseFailure) if no list is found and RangeViolationError if a
/// tuple of the first list is outside the PointTarget ranges.
PointList parse_points(std::string_view text);

enum class ParseStatus { Ok, ParseFailure, RangeViolation };

struct ParseOutcome {
  ParseStatus status = ParseStatus::Ok;
  PointList points;
  std::optional<std::size_t> bad_tuple;
  std::string message;
};

/// Non-throwing form of parse_points.
ParseOutcome try_parse_points(std::string_view text) noexcept;

/// Canonical "[(u, v, Z), (u, v, Z)]".
std::string serialize_points(const PointList& points);

}  // namespace embloc
