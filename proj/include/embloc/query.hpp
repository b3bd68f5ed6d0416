#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "embloc/camera.hpp"
#include "embloc/relations.hpp"
#include "json.hpp"

namespace embloc {

enum class Family { Touchable, DirOnly, DirOffset, BodyLength, Between, BetweenOffset };

inline constexpr std::array<Family, 6> kAllFamilies = {Family::Touchable, Family::DirOnly,
                                                       Family::DirOffset, Family::BodyLength,
                                                       Family::Between,   Family::BetweenOffset};
inline constexpr std::array<Family, 5> kAirFamilies = {Family::DirOnly, Family::DirOffset,
                                                       Family::BodyLength, Family::Between,
                                                       Family::BetweenOffset};

std::string_view to_string(Family f) noexcept;
Family family_from_string(std::string_view s);

inline bool is_air(Family f) noexcept { return f != Family::Touchable; }
inline bool is_between(Family f) noexcept { return f == Family::Between || f == Family::BetweenOffset; }
/// Families whose queries carry a distance constraint.
inline bool has_metric(Family f) noexcept {
  return f == Family::DirOffset || f == Family::BodyLength || f == Family::BetweenOffset;
}

/// Enough to re-score any prediction against the scene the query came from.
struct GroundTruth {
  // Touchable: the object whose mask is the valid 2D region.
  std::optional<std::string> mask_object;

  // Air: anchors[0] is the apex / distance reference, anchors[1] the far
  // corridor end for between families.
  std::vector<std::string> anchors;
  std::vector<Point3> anchor_centers;
  std::optional<int> direction_code;
  /// Offset realized by the serialized answer; required_offset() of it is r*.
  std::optional<OffsetSpec> offset;
  std::optional<double> r_star_mm;

  bool operator==(const GroundTruth&) const = default;
};

struct Query {
  std::string id;
  Family family = Family::DirOnly;
  std::string image;
  std::string depth;
  std::string intrinsics;
  std::string detections;
  std::string instruction;
  std::vector<std::string> refs;
  std::optional<int> direction_code;
  /// Offset as stated in the instruction.
  std::optional<OffsetSpec> offset;
  std::string answer_text;
  GroundTruth gt;

  /// Throws Error(Format) when family-dependent field presence rules fail.
  void validate() const;

  bool operator==(const Query&) const = default;
};

nlohmann::ordered_json to_json(const Query& q);
Query query_from_json(const nlohmann::json& j);

/// One canonical JSONL line (no trailing newline).
std::string serialize_query(const Query& q);

}  // namespace embloc
