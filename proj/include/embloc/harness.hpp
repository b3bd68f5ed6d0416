#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "embloc/camera.hpp"
#include "embloc/outparse.hpp"
#include "embloc/query.hpp"
#include "embloc/scene.hpp"
#include "json.hpp"

namespace embloc {

struct SyntheticSceneSpec {
  std::uint64_t seed = 1;
  int min_objects = 2;
  int max_objects = 5;
  double min_size_mm = 60;
  double max_size_mm = 250;
  /// Camera-frame box that must contain every spawned cuboid.
  Point3 volume_min{-500, -300, 1200};
  Point3 volume_max{500, 300, 2800};
  /// Minimum clearance between spawned cuboids.
  double spawn_gap_mm = 20;
  CameraIntrinsics cam{300, 300, 160, 120, 320, 240};
  double background_mm = 4000;
  /// Per-pixel probability of a depth hole.
  double hole_rate = 0;
  /// Objects with fewer visible pixels are left out of the detections.
  int min_mask_pixels = 30;
  int max_placement_attempts = 500;

  void validate() const;
};

nlohmann::ordered_json to_json(const SyntheticSceneSpec& s);
SyntheticSceneSpec scene_spec_from_json(const nlohmann::json& j);

struct Cuboid {
  std::string id;
  std::string caption;
  Point3 center;
  Point3 half_extents;
};

struct SyntheticScene {
  Scene scene;
  std::vector<Cuboid> cuboids;
  /// Detections that survived the visibility filter, in scene order.
  std::vector<Detection> detections;
  /// Flat-shaded placeholder colour image.
  std::vector<std::uint8_t> rgb;
};

/// Throws Error(PlacementFailure) when the requested objects do not fit.
SyntheticScene generate_scene(const SyntheticSceneSpec& spec);

/// Rasterizes cuboids: nearest surface per pixel center wins; depth rounded to mm.
/// `owner` receives the cuboid index per pixel or -1 for background.
DepthMap render_cuboids(std::span<const Cuboid> cuboids, const CameraIntrinsics& cam, double background_mm,
                        std::vector<int>* owner = nullptr);

struct SceneAssetPaths {
  std::filesystem::path image;
  std::filesystem::path depth;
  std::filesystem::path intrinsics;
  std::filesystem::path detections;
};

/// Writes rgb.png, depth.png (+ sidecar), intrinsics.json and detections.jsonl into dir.
SceneAssetPaths write_scene_assets(const SyntheticScene& s, const std::filesystem::path& dir);

struct OracleKind {
  enum class Kind { Perfect, NoisyDepth, RelationBlind, Random };

  Kind kind = Kind::Perfect;
  double sigma_mm = 0;

  std::string name() const;
};

/// Accepts perfect, noisy:<sigma>, relation_blind, random.
OracleKind parse_oracle(std::string_view text);

struct OracleOptions {
  std::uint64_t seed = 0;
  /// Depth range used by the Random oracle.
  double random_z_min_mm = 300;
  double random_z_max_mm = 4000;
  /// Direction redraws for RelationBlind when the point leaves the image.
  int max_redraws = 100;
};

/// Deterministic per (kind, options.seed, query id).
PointList run_oracle(const OracleKind& kind, const Query& q, const Scene& scene, const OracleOptions& opts = {});

}  // namespace embloc
