#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "embloc/camera.hpp"
#include "embloc/depth.hpp"
#include "embloc/query.hpp"
#include "embloc/relations.hpp"
#include "embloc/scene.hpp"
#include "json.hpp"

namespace embloc {

struct LiftResult {
  std::vector<PointTarget> targets;
  std::size_t dropped = 0;
  std::vector<std::string> reasons;
};

/// Pairs each annotated pixel with its depth. Pixels on holes are dropped.
/// Throws Error(EmptyLift) when nothing survives, Error(OutOfImage) for pixels outside the image.
LiftResult lift_touchable(std::span<const PixelIndex> annotation, const DepthMap& depth,
                          const CameraIntrinsics& cam);

struct GenOptions {
  int max_attempts = 64;
  /// Metric offsets are drawn in whole centimetres inside this range.
  double metric_offset_min_mm = 100;
  double metric_offset_max_mm = 500;
  int body_length_min = 1;
  int body_length_max = 3;
  /// Witness radius for dir_only queries.
  double dir_radius_min_mm = 100;
  double dir_radius_max_mm = 500;
  /// Witness t is kept this far inside the corridor span.
  double corridor_t_margin = 0.05;
  /// Witness distance from the segment, as a fraction of the corridor radius.
  double corridor_perp_fraction = 0.5;
  /// Largest allowed gap between the nominal metric offset and the quantized witness.
  double offset_slack_mm = 5;
  int touch_points_min = 1;
  int touch_points_max = 3;

  void validate() const;
};

nlohmann::ordered_json to_json(const GenOptions& o);
GenOptions gen_options_from_json(const nlohmann::json& j);

/// Where the query's scene lives, relative to the dataset file.
struct QueryContext {
  std::string id;
  std::string image;
  std::string depth;
  std::string intrinsics;
  std::string detections;
};

/// Throws Error(Unsatisfiable) when no verified witness is found in max_attempts tries.
Query synthesize_air_query(const Scene& scene, Family family, std::uint64_t seed, const RelationParams& params,
                           const GenOptions& opts = {}, const QueryContext& ctx = {});

Query synthesize_touchable_query(const Scene& scene, std::uint64_t seed, const GenOptions& opts = {},
                                 const QueryContext& ctx = {});

/// Dispatches on family.
Query synthesize_query(const Scene& scene, Family family, std::uint64_t seed, const RelationParams& params,
                       const GenOptions& opts = {}, const QueryContext& ctx = {});

using FamilyMix = std::map<Family, double>;
using FamilyCounts = std::map<Family, std::size_t>;

/// Largest-remainder apportionment. Ratios must be non-negative and sum to 1 within 1e-6.
FamilyCounts plan_mix(std::size_t total, const FamilyMix& ratios);

/// Air-point ratios of the reference dataset.
FamilyMix table1_mix();
/// Equal weight on all six families.
FamilyMix uniform_mix();
FamilyMix mix_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const FamilyMix& mix);

struct DatasetManifest {
  std::string dataset;
  std::size_t total = 0;
  FamilyCounts counts;
  std::string config_hash;
};

nlohmann::ordered_json to_json(const DatasetManifest& m);

/// Manifest path that sits next to a dataset file.
std::filesystem::path manifest_path(const std::filesystem::path& dataset);

/// One JSON object per line, plus a manifest next to the file.
DatasetManifest write_dataset(std::span<const Query> queries, const std::filesystem::path& path,
                              const std::string& config_hash = "");
std::vector<Query> read_dataset(const std::filesystem::path& path);

}  // namespace embloc
