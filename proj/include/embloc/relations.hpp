#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "embloc/camera.hpp"
#include "embloc/scene.hpp"
#include "json.hpp"

namespace embloc {

/// One of the 26 camera-frame directions: the nonzero vectors of {-1,0,1}^3.
struct Direction26 {
  int code = 0;
  std::array<int, 3> grid{};
  Point3 unit;
  std::string_view label;
};

inline constexpr int kDirectionCount = 26;

/// Codes 0-5 are the axes, 6-17 the two-axis composites, 18-25 the corners.
/// Labels: right=+X, left=-X, above=-Y, below=+Y, behind=+Z, front=-Z;
/// composites join vertical, horizontal and depth parts with '-'.
const std::array<Direction26, kDirectionCount>& all_directions();
const Direction26& direction_from_code(int code);
const Direction26& direction_from_label(std::string_view label);
const Direction26& direction_from_grid(int dx, int dy, int dz);

/// Instruction phrase, e.g. "to the right of", "in front of", "above-left of".
std::string direction_phrase(const Direction26& d);

struct RelationParams {
  double cone_half_angle_deg = 30.0;
  double corridor_radius_mm = 100.0;
  double corridor_lo = 0.10;
  double corridor_hi = 0.90;
  double metric_tol_mm = 50.0;
  double occupancy_inflation = kDefaultInflation;
  bool occupancy_check = true;

  /// Throws Error(InvalidArgument) when a field is out of range.
  void validate() const;

  /// cos^2 of the half-angle, rounded once from extended precision so that
  /// exactly representable boundaries (e.g. 0.75 at 30 deg) stay exact.
  double cone_cos2() const;
};

nlohmann::ordered_json to_json(const RelationParams& p);
RelationParams relation_params_from_json(const nlohmann::json& j);

/// angle(p - c, d) <= alpha, inclusive. Throws Error(DegenerateDisplacement) if p == c.
bool in_direction_cone(const Point3& p, const Point3& c, const Direction26& d, const RelationParams& params);

/// lo <= t <= hi and perpendicular distance <= radius, inclusive.
/// Throws Error(DegenerateSegment) if a == b.
bool in_between_corridor(const Point3& p, const Point3& a, const Point3& b, const RelationParams& params);

double distance(const Point3& a, const Point3& b) noexcept;

/// | |p - c| - r_star |
double distance_bias(const Point3& p, const Point3& c, double r_star) noexcept;

struct OffsetSpec {
  enum class Kind { Metric, BodyLengths };

  Kind kind = Kind::Metric;
  double value = 0;

  static OffsetSpec metric(double mm) { return {Kind::Metric, mm}; }
  static OffsetSpec body_lengths(double n) { return {Kind::BodyLengths, n}; }

  bool operator==(const OffsetSpec&) const = default;
};

nlohmann::ordered_json to_json(const OffsetSpec& o);
OffsetSpec offset_from_json(const nlohmann::json& j);

/// Metric(m) -> m; BodyLengths(n) -> n * body_length(anchor). Throws Error(BadOffset) if negative.
double required_offset(const OffsetSpec& spec, const ProxyBox& anchor);

/// Direction with the largest cosine to p - c; ties go to the lowest code.
const Direction26& classify_direction(const Point3& p, const Point3& c);

/// Structure-of-arrays view over a batch of points.
struct PointsView {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> z;

  std::size_t size() const noexcept { return x.size(); }
};

// Batch forms of the predicates. Degenerate points (p == apex) yield 0
// instead of raising. Output spans must match the input size.
void cone_mask(PointsView pts, const Point3& apex, const Direction26& d, const RelationParams& params,
               std::span<std::uint8_t> out);
void corridor_mask(PointsView pts, const Point3& a, const Point3& b, const RelationParams& params,
                   std::span<std::uint8_t> out);
void box_mask(PointsView pts, const ProxyBox& box, double inflation, std::span<std::uint8_t> out);

}  // namespace embloc
