#include "embloc/relations.hpp"

#include <cmath>
#include <numbers>

#include "embloc/detail/predicates.hpp"
#include "embloc/error.hpp"
#include "embloc/simd/kernels.hpp"

namespace embloc {
namespace {

std::string label_for(const std::array<int, 3>& g) {
  std::string s;
  auto add = [&](std::string_view part) {
    if (!s.empty()) s += '-';
    s += part;
  };
  if (g[1] != 0) add(g[1] < 0 ? "above" : "below");
  if (g[0] != 0) add(g[0] > 0 ? "right" : "left");
  if (g[2] != 0) add(g[2] > 0 ? "behind" : "front");
  return s;
}

std::array<Direction26, kDirectionCount> build_directions() {
  static std::array<std::string, kDirectionCount> labels;
  std::array<Direction26, kDirectionCount> dirs{};
  constexpr int order[3] = {1, -1, 0};
  int code = 0;
  for (int nonzero = 1; nonzero <= 3; ++nonzero) {
    for (int x : order) {
      for (int y : order) {
        for (int z : order) {
          if ((x != 0) + (y != 0) + (z != 0) != nonzero) continue;
          const double len = std::sqrt(static_cast<double>(x * x + y * y + z * z));
          labels[code] = label_for({x, y, z});
          dirs[code] = {code, {x, y, z}, {x / len, y / len, z / len}, labels[code]};
          ++code;
        }
      }
    }
  }
  return dirs;
}

}  // namespace

const std::array<Direction26, kDirectionCount>& all_directions() {
  static const auto dirs = build_directions();
  return dirs;
}

const Direction26& direction_from_code(int code) {
  if (code < 0 || code >= kDirectionCount) {
    throw Error(ErrorCode::InvalidArgument, "direction code " + std::to_string(code) + " outside 0..25");
  }
  return all_directions()[static_cast<std::size_t>(code)];
}

const Direction26& direction_from_label(std::string_view label) {
  for (const auto& d : all_directions()) {
    if (d.label == label) return d;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown direction label '" + std::string(label) + "'");
}

const Direction26& direction_from_grid(int dx, int dy, int dz) {
  for (const auto& d : all_directions()) {
    if (d.grid == std::array<int, 3>{dx, dy, dz}) return d;
  }
  throw Error(ErrorCode::InvalidArgument, "direction grid vector must be a nonzero element of {-1,0,1}^3");
}

std::string direction_phrase(const Direction26& d) {
  if (d.code < 6) {
    static constexpr std::array<std::string_view, 6> kAxisPhrases = {
        "to the right of", "to the left of", "below", "above", "behind", "in front of"};
    return std::string(kAxisPhrases[static_cast<std::size_t>(d.code)]);
  }
  return std::string(d.label) + " of";
}

void RelationParams::validate() const {
  if (!(cone_half_angle_deg > 0 && cone_half_angle_deg < 90)) {
    throw Error(ErrorCode::InvalidArgument, "cone half-angle must be in (0, 90) degrees");
  }
  if (!(corridor_radius_mm > 0)) throw Error(ErrorCode::InvalidArgument, "corridor radius must be positive");
  if (!(corridor_lo >= 0 && corridor_lo < corridor_hi && corridor_hi <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "corridor span must satisfy 0 <= lo < hi <= 1");
  }
  if (!(metric_tol_mm > 0)) throw Error(ErrorCode::InvalidArgument, "metric tolerance must be positive");
  if (!(occupancy_inflation > 0)) throw Error(ErrorCode::InvalidArgument, "occupancy inflation must be positive");
}

double RelationParams::cone_cos2() const {
  const long double a = static_cast<long double>(cone_half_angle_deg) * std::numbers::pi_v<long double> / 180.0L;
  const long double c = std::cos(a);
  return static_cast<double>(c * c);
}

nlohmann::ordered_json to_json(const RelationParams& p) {
  nlohmann::ordered_json j;
  j["cone_half_angle_deg"] = p.cone_half_angle_deg;
  j["corridor_radius_mm"] = p.corridor_radius_mm;
  j["corridor_span"] = {p.corridor_lo, p.corridor_hi};
  j["metric_tol_mm"] = p.metric_tol_mm;
  j["occupancy_inflation"] = p.occupancy_inflation;
  j["occupancy_check"] = p.occupancy_check;
  return j;
}

RelationParams relation_params_from_json(const nlohmann::json& j) {
  RelationParams p;
  try {
    p.cone_half_angle_deg = j.value("cone_half_angle_deg", p.cone_half_angle_deg);
    p.corridor_radius_mm = j.value("corridor_radius_mm", p.corridor_radius_mm);
    if (j.contains("corridor_span")) {
      p.corridor_lo = j.at("corridor_span").at(0).get<double>();
      p.corridor_hi = j.at("corridor_span").at(1).get<double>();
    }
    p.metric_tol_mm = j.value("metric_tol_mm", p.metric_tol_mm);
    p.occupancy_inflation = j.value("occupancy_inflation", p.occupancy_inflation);
    p.occupancy_check = j.value("occupancy_check", p.occupancy_check);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("relation params: ") + e.what());
  }
  p.validate();
  return p;
}

bool in_direction_cone(const Point3& p, const Point3& c, const Direction26& d, const RelationParams& params) {
  const Point3 w = p - c;
  if (w.x == 0 && w.y == 0 && w.z == 0) {
    throw Error(ErrorCode::DegenerateDisplacement, "prediction coincides with the anchor");
  }
  const double gx = d.grid[0], gy = d.grid[1], gz = d.grid[2];
  return detail::cone_accept(w.x, w.y, w.z, gx, gy, gz, gx * gx + gy * gy + gz * gz, params.cone_cos2());
}

bool in_between_corridor(const Point3& p, const Point3& a, const Point3& b, const RelationParams& params) {
  const Point3 s = b - a;
  const double s2 = s.x * s.x + s.y * s.y + s.z * s.z;
  if (s2 == 0) throw Error(ErrorCode::DegenerateSegment, "corridor endpoints coincide");
  const Point3 w = p - a;
  return detail::corridor_accept(w.x, w.y, w.z, s.x, s.y, s.z, s2, params.corridor_lo, params.corridor_hi,
                                 params.corridor_radius_mm * params.corridor_radius_mm);
}

double distance(const Point3& a, const Point3& b) noexcept { return norm(a - b); }

double distance_bias(const Point3& p, const Point3& c, double r_star) noexcept {
  return std::fabs(distance(p, c) - r_star);
}

nlohmann::ordered_json to_json(const OffsetSpec& o) {
  nlohmann::ordered_json j;
  if (o.kind == OffsetSpec::Kind::Metric) {
    j["kind"] = "metric";
    j["mm"] = o.value;
  } else {
    j["kind"] = "body_lengths";
    j["count"] = o.value;
  }
  return j;
}

OffsetSpec offset_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "metric") return OffsetSpec::metric(j.at("mm").get<double>());
    if (kind == "body_lengths") return OffsetSpec::body_lengths(j.at("count").get<double>());
    throw Error(ErrorCode::Format, "unknown offset kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("offset: ") + e.what());
  }
}

double required_offset(const OffsetSpec& spec, const ProxyBox& anchor) {
  if (!(spec.value >= 0)) throw Error(ErrorCode::BadOffset, "offset must be non-negative");
  return spec.kind == OffsetSpec::Kind::Metric ? spec.value : spec.value * body_length(anchor);
}

const Direction26& classify_direction(const Point3& p, const Point3& c) {
  const Point3 w = p - c;
  if (w.x == 0 && w.y == 0 && w.z == 0) {
    throw Error(ErrorCode::DegenerateDisplacement, "cannot classify a zero displacement");
  }
  const auto& dirs = all_directions();
  const Direction26* best = &dirs[0];
  double best_dot = dot(w, dirs[0].unit);
  for (const auto& d : dirs) {
    const double s = dot(w, d.unit);
    if (s > best_dot) {
      best_dot = s;
      best = &d;
    }
  }
  return *best;
}

namespace {

void check_sizes(PointsView pts, std::span<std::uint8_t> out) {
  if (pts.y.size() != pts.x.size() || pts.z.size() != pts.x.size() || out.size() != pts.x.size()) {
    throw Error(ErrorCode::InvalidArgument, "batch spans differ in length");
  }
}

}  // namespace

void cone_mask(PointsView pts, const Point3& apex, const Direction26& d, const RelationParams& params,
               std::span<std::uint8_t> out) {
  check_sizes(pts, out);
  const double a[3] = {apex.x, apex.y, apex.z};
  const double g[3] = {static_cast<double>(d.grid[0]), static_cast<double>(d.grid[1]),
                       static_cast<double>(d.grid[2])};
  simd::active_kernels().cone_mask(pts.x.data(), pts.y.data(), pts.z.data(), pts.size(), a, g,
                                   params.cone_cos2(), out.data());
}

void corridor_mask(PointsView pts, const Point3& a, const Point3& b, const RelationParams& params,
                   std::span<std::uint8_t> out) {
  check_sizes(pts, out);
  if (a == b) throw Error(ErrorCode::DegenerateSegment, "corridor endpoints coincide");
  const double pa[3] = {a.x, a.y, a.z};
  const double pb[3] = {b.x, b.y, b.z};
  simd::active_kernels().corridor_mask(pts.x.data(), pts.y.data(), pts.z.data(), pts.size(), pa, pb,
                                       params.corridor_lo, params.corridor_hi, params.corridor_radius_mm,
                                       out.data());
}

void box_mask(PointsView pts, const ProxyBox& box, double inflation, std::span<std::uint8_t> out) {
  check_sizes(pts, out);
  const double c[3] = {box.center.x, box.center.y, box.center.z};
  const double h[3] = {box.half_extents.x, box.half_extents.y, box.half_extents.z};
  simd::active_kernels().box_mask(pts.x.data(), pts.y.data(), pts.z.data(), pts.size(), c, h, inflation,
                                  out.data());
}

}  // namespace embloc
