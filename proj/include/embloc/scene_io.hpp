#pragma once

#include <filesystem>
#include <vector>

#include "embloc/scene.hpp"
#include "json.hpp"

namespace embloc {

// Masks travel as uncompressed COCO-style run lengths: column-major order,
// alternating runs starting with background. {"size": [h, w], "counts": [...]}
nlohmann::ordered_json encode_rle(const Mask& mask);
Mask decode_rle(const nlohmann::json& rle);

/// One JSON object per line: {id, caption, bbox: [x0,y0,x1,y1], rle_mask}.
void write_detections_jsonl(const std::filesystem::path& path, const std::vector<Detection>& detections);
std::vector<Detection> read_detections_jsonl(const std::filesystem::path& path);

/// Files that make up one scene on disk. Paths are resolved relative to `root`.
struct SceneFiles {
  std::filesystem::path depth;
  std::filesystem::path intrinsics;
  std::filesystem::path detections;
};

Scene load_scene(const SceneFiles& files, TrimPercentiles trim = {});

}  // namespace embloc
