#include "embloc/harness.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "embloc/depth_io.hpp"
#include "embloc/error.hpp"
#include "embloc/rng.hpp"
#include "embloc/scene_io.hpp"

namespace embloc {

namespace {

struct Colour {
  std::string_view name;
  std::array<std::uint8_t, 3> rgb;
};

constexpr std::array<Colour, 10> kColours = {{
    {"red", {200, 40, 40}},
    {"blue", {40, 70, 200}},
    {"green", {40, 160, 60}},
    {"yellow", {230, 210, 40}},
    {"orange", {240, 140, 30}},
    {"purple", {130, 60, 170}},
    {"white", {240, 240, 240}},
    {"black", {25, 25, 25}},
    {"brown", {120, 80, 40}},
    {"pink", {240, 150, 190}},
}};

constexpr std::array<std::string_view, 8> kNouns = {"box", "book", "block", "carton", "crate", "tin", "case", "brick"};

Point3 point_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

bool separated(const Cuboid& a, const Point3& c, const Point3& h, double gap) {
  return std::fabs(a.center.x - c.x) >= a.half_extents.x + h.x + gap ||
         std::fabs(a.center.y - c.y) >= a.half_extents.y + h.y + gap ||
         std::fabs(a.center.z - c.z) >= a.half_extents.z + h.z + gap;
}

}  // namespace

void SyntheticSceneSpec::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidArgument, "scene spec: " + why); };
  cam.validate();
  if (min_objects < 0 || min_objects > max_objects) bad("object count range");
  if (static_cast<std::size_t>(max_objects) > kColours.size() * kNouns.size()) bad("too many objects for unique captions");
  if (!(min_size_mm > 0 && min_size_mm <= max_size_mm)) bad("object size range");
  if (!(volume_min.z > 0)) bad("placement volume must lie in front of the camera");
  if (!(volume_max.x - volume_min.x >= max_size_mm && volume_max.y - volume_min.y >= max_size_mm &&
        volume_max.z - volume_min.z >= max_size_mm)) {
    bad("placement volume smaller than the largest object");
  }
  if (!(spawn_gap_mm >= 0)) bad("spawn gap");
  if (!(background_mm >= 1 && background_mm < static_cast<double>(1u << 24))) bad("background depth");
  if (!(hole_rate >= 0 && hole_rate < 1)) bad("hole rate must be in [0, 1)");
  if (min_mask_pixels < 3) bad("min_mask_pixels must be >= 3");
  if (max_placement_attempts < 1) bad("max_placement_attempts");
}

nlohmann::ordered_json to_json(const SyntheticSceneSpec& s) {
  nlohmann::ordered_json j;
  j["seed"] = s.seed;
  j["objects"] = {s.min_objects, s.max_objects};
  j["size_mm"] = {s.min_size_mm, s.max_size_mm};
  j["volume_min"] = {s.volume_min.x, s.volume_min.y, s.volume_min.z};
  j["volume_max"] = {s.volume_max.x, s.volume_max.y, s.volume_max.z};
  j["spawn_gap_mm"] = s.spawn_gap_mm;
  j["intrinsics"] = to_json(s.cam);
  j["background_mm"] = s.background_mm;
  j["hole_rate"] = s.hole_rate;
  j["min_mask_pixels"] = s.min_mask_pixels;
  j["max_placement_attempts"] = s.max_placement_attempts;
  return j;
}

SyntheticSceneSpec scene_spec_from_json(const nlohmann::json& j) {
  SyntheticSceneSpec s;
  try {
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("objects")) {
      s.min_objects = j["objects"].at(0).get<int>();
      s.max_objects = j["objects"].at(1).get<int>();
    }
    if (j.contains("size_mm")) {
      s.min_size_mm = j["size_mm"].at(0).get<double>();
      s.max_size_mm = j["size_mm"].at(1).get<double>();
    }
    if (j.contains("volume_min")) s.volume_min = point_from_json(j["volume_min"]);
    if (j.contains("volume_max")) s.volume_max = point_from_json(j["volume_max"]);
    if (j.contains("spawn_gap_mm")) s.spawn_gap_mm = j["spawn_gap_mm"].get<double>();
    if (j.contains("intrinsics")) s.cam = intrinsics_from_json(j["intrinsics"]);
    if (j.contains("background_mm")) s.background_mm = j["background_mm"].get<double>();
    if (j.contains("hole_rate")) s.hole_rate = j["hole_rate"].get<double>();
    if (j.contains("min_mask_pixels")) s.min_mask_pixels = j["min_mask_pixels"].get<int>();
    if (j.contains("max_placement_attempts")) s.max_placement_attempts = j["max_placement_attempts"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("scene spec: ") + e.what());
  }
  s.validate();
  return s;
}

DepthMap render_cuboids(std::span<const Cuboid> cuboids, const CameraIntrinsics& cam, double background_mm,
                        std::vector<int>* owner) {
  cam.validate();
  DepthMap depth(cam.width, cam.height);
  if (owner) owner->assign(static_cast<std::size_t>(cam.width) * cam.height, -1);
  const auto bg = static_cast<std::uint32_t>(std::llround(background_mm));
  for (int y = 0; y < cam.height; ++y) {
    const double dy = (y + 0.5 - cam.cy) / cam.fy;
    for (int x = 0; x < cam.width; ++x) {
      const double dx = (x + 0.5 - cam.cx) / cam.fx;
      double best = std::numeric_limits<double>::infinity();
      int hit = -1;
      for (std::size_t i = 0; i < cuboids.size(); ++i) {
        const Cuboid& c = cuboids[i];
        // Ray (dx, dy, 1) * t, so t is the camera-frame depth.
        double t0 = c.center.z - c.half_extents.z;
        double t1 = c.center.z + c.half_extents.z;
        auto slab = [&](double d, double lo, double hi) {
          if (d == 0) {
            if (lo > 0 || hi < 0) t0 = std::numeric_limits<double>::infinity();
            return;
          }
          double a = lo / d;
          double b = hi / d;
          if (a > b) std::swap(a, b);
          t0 = std::max(t0, a);
          t1 = std::min(t1, b);
        };
        slab(dx, c.center.x - c.half_extents.x, c.center.x + c.half_extents.x);
        slab(dy, c.center.y - c.half_extents.y, c.center.y + c.half_extents.y);
        if (t0 <= t1 && t0 > 0 && t0 < best) {
          best = t0;
          hit = static_cast<int>(i);
        }
      }
      if (hit >= 0) {
        depth.set(x, y, static_cast<std::uint32_t>(std::llround(best)));
        if (owner) (*owner)[static_cast<std::size_t>(y) * cam.width + x] = hit;
      } else {
        depth.set(x, y, bg);
      }
    }
  }
  return depth;
}

SyntheticScene generate_scene(const SyntheticSceneSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0));
  const int count = static_cast<int>(rng.uniform_int(spec.min_objects, spec.max_objects));

  std::vector<std::size_t> names(kColours.size() * kNouns.size());
  for (std::size_t i = 0; i < names.size(); ++i) names[i] = i;
  rng.shuffle(std::span<std::size_t>(names));

  SyntheticScene out;
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < spec.max_placement_attempts && !placed; ++attempt) {
      const Point3 h{rng.uniform(spec.min_size_mm, spec.max_size_mm) / 2,
                     rng.uniform(spec.min_size_mm, spec.max_size_mm) / 2,
                     rng.uniform(spec.min_size_mm, spec.max_size_mm) / 2};
      const Point3 c{rng.uniform(spec.volume_min.x + h.x, spec.volume_max.x - h.x),
                     rng.uniform(spec.volume_min.y + h.y, spec.volume_max.y - h.y),
                     rng.uniform(spec.volume_min.z + h.z, spec.volume_max.z - h.z)};
      placed = std::all_of(out.cuboids.begin(), out.cuboids.end(),
                           [&](const Cuboid& o) { return separated(o, c, h, spec.spawn_gap_mm); });
      if (placed) {
        const std::size_t n = names[static_cast<std::size_t>(i)];
        const Colour& colour = kColours[n / kNouns.size()];
        out.cuboids.push_back({"obj" + std::to_string(i),
                               std::string(colour.name) + " " + std::string(kNouns[n % kNouns.size()]), c, h});
      }
    }
    if (!placed) {
      throw Error(ErrorCode::PlacementFailure, "could not place object " + std::to_string(i + 1) + " of " +
                                                   std::to_string(count) + " after " +
                                                   std::to_string(spec.max_placement_attempts) + " attempts");
    }
  }

  std::vector<int> owner;
  DepthMap depth = render_cuboids(out.cuboids, spec.cam, spec.background_mm, &owner);
  if (spec.hole_rate > 0) {
    Rng holes(derive_seed(spec.seed, 1));
    for (int y = 0; y < depth.height(); ++y) {
      for (int x = 0; x < depth.width(); ++x) {
        if (holes.bernoulli(spec.hole_rate)) depth.set(x, y, 0);
      }
    }
  }

  const int W = spec.cam.width;
  const int H = spec.cam.height;
  out.rgb.assign(static_cast<std::size_t>(W) * H * 3, 128);
  for (std::size_t i = 0; i < out.cuboids.size(); ++i) {
    Mask mask(W, H);
    std::size_t visible = 0;
    std::size_t valid = 0;
    const auto& rgb = kColours[names[i] / kNouns.size()].rgb;
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        const std::size_t k = static_cast<std::size_t>(y) * W + x;
        if (owner[k] != static_cast<int>(i)) continue;
        mask.set(x, y);
        ++visible;
        valid += depth.valid(x, y) ? 1 : 0;
        std::copy(rgb.begin(), rgb.end(), out.rgb.begin() + static_cast<std::ptrdiff_t>(3 * k));
      }
    }
    if (visible < static_cast<std::size_t>(spec.min_mask_pixels) || 2 * valid < visible || valid < 3) continue;
    const Cuboid& c = out.cuboids[i];
    out.detections.push_back({c.id, c.caption, mask.bounding_box(), std::move(mask)});
  }
  out.scene = build_scene(spec.cam, std::move(depth), out.detections);
  return out;
}

SceneAssetPaths write_scene_assets(const SyntheticScene& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  SceneAssetPaths p{dir / "rgb.png", dir / "depth.png", dir / "intrinsics.json", dir / "detections.jsonl"};
  write_rgb_png(p.image, s.scene.cam.width, s.scene.cam.height, s.rgb);
  write_depth_png(p.depth, s.scene.depth);
  write_intrinsics(p.intrinsics, s.scene.cam);
  write_detections_jsonl(p.detections, s.detections);
  return p;
}

std::string OracleKind::name() const {
  switch (kind) {
    case Kind::Perfect: return "perfect";
    case Kind::NoisyDepth: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "noisy:%g", sigma_mm);
      return buf;
    }
    case Kind::RelationBlind: return "relation_blind";
    case Kind::Random: return "random";
  }
  return "unknown";
}

OracleKind parse_oracle(std::string_view text) {
  if (text == "perfect") return {OracleKind::Kind::Perfect, 0};
  if (text == "relation_blind") return {OracleKind::Kind::RelationBlind, 0};
  if (text == "random") return {OracleKind::Kind::Random, 0};
  if (text.starts_with("noisy:")) {
    const std::string_view num = text.substr(6);
    double sigma = 0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), sigma);
    if (ec == std::errc() && ptr == num.data() + num.size() && std::isfinite(sigma) && sigma >= 0) {
      return {OracleKind::Kind::NoisyDepth, sigma};
    }
  }
  throw Error(ErrorCode::InvalidArgument,
              "unknown oracle '" + std::string(text) + "' (perfect, noisy:<sigma>, relation_blind, random)");
}

PointList run_oracle(const OracleKind& kind, const Query& q, const Scene& scene, const OracleOptions& opts) {
  const PointList answer = parse_points(q.answer_text);
  Rng rng(derive_seed(derive_seed(opts.seed, static_cast<std::uint64_t>(kind.kind)), fnv1a64(q.id)));
  PointList out;
  switch (kind.kind) {
    case OracleKind::Kind::Perfect:
      return answer;
    case OracleKind::Kind::NoisyDepth:
      for (PointTarget t : answer) {
        const double z = static_cast<double>(t.z) + kind.sigma_mm * rng.normal();
        t.z = static_cast<std::int32_t>(std::clamp<double>(std::llround(z), 1.0, 2147483647.0));
        out.push_back(t);
      }
      return out;
    case OracleKind::Kind::Random:
      for (std::size_t i = 0; i < answer.size(); ++i) {
        out.push_back({static_cast<int>(rng.uniform_int(0, kNormalizedGrid - 1)),
                       static_cast<int>(rng.uniform_int(0, kNormalizedGrid - 1)),
                       static_cast<std::int32_t>(rng.uniform_int(static_cast<std::int64_t>(opts.random_z_min_mm),
                                                                 static_cast<std::int64_t>(opts.random_z_max_mm)))});
      }
      return out;
    case OracleKind::Kind::RelationBlind:
      break;
  }

  if (q.family == Family::Touchable) {
    // Knows where surfaces are, not which object was asked for.
    for (std::size_t i = 0; i < answer.size(); ++i) {
      for (int k = 0; k < opts.max_redraws; ++k) {
        const int u = static_cast<int>(rng.uniform_int(0, kNormalizedGrid - 1));
        const int v = static_cast<int>(rng.uniform_int(0, kNormalizedGrid - 1));
        const PixelIndex px = normalized_cell_pixel(u, v, scene.cam.width, scene.cam.height);
        const std::uint32_t z = scene.depth.at(px.x, px.y);
        if (z == 0) continue;
        out.push_back({u, v, static_cast<std::int32_t>(z)});
        break;
      }
    }
    return out;
  }

  const Point3 c = scene.at(q.refs.at(0)).proxy.center;
  for (const PointTarget& t : answer) {
    const double r = distance(back_project(t, scene.cam), c);
    for (int k = 0; k < opts.max_redraws; ++k) {
      Point3 dir{rng.normal(), rng.normal(), rng.normal()};
      const double len = norm(dir);
      if (!(len > 0)) continue;
      try {
        out.push_back(project(c + (r / len) * dir, scene.cam));
        break;
      } catch (const Error&) {
      }
    }
  }
  return out;
}

}  // namespace embloc
