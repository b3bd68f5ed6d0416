#include "embloc/scene_io.hpp"

#include <fstream>
#include <string>

#include "embloc/depth_io.hpp"
#include "embloc/error.hpp"

namespace embloc {

nlohmann::ordered_json encode_rle(const Mask& mask) {
  std::vector<std::uint64_t> counts;
  bool current = false;
  std::uint64_t run = 0;
  for (int x = 0; x < mask.width(); ++x) {
    for (int y = 0; y < mask.height(); ++y) {
      if (mask.at(x, y) != current) {
        counts.push_back(run);
        run = 0;
        current = !current;
      }
      ++run;
    }
  }
  counts.push_back(run);
  nlohmann::ordered_json j;
  j["size"] = {mask.height(), mask.width()};
  j["counts"] = counts;
  return j;
}

Mask decode_rle(const nlohmann::json& rle) {
  try {
    const int h = rle.at("size").at(0).get<int>();
    const int w = rle.at("size").at(1).get<int>();
    if (h < 0 || w < 0) throw Error(ErrorCode::Format, "negative mask size");
    Mask mask(w, h);
    const std::uint64_t total = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
    std::uint64_t pos = 0;
    bool on = false;
    for (const auto& c : rle.at("counts")) {
      const auto run = c.get<std::uint64_t>();
      if (run > total - pos) throw Error(ErrorCode::Format, "RLE runs exceed mask size");
      if (on) {
        for (std::uint64_t k = pos; k < pos + run; ++k) {
          mask.set(static_cast<int>(k / static_cast<std::uint64_t>(h)),
                   static_cast<int>(k % static_cast<std::uint64_t>(h)));
        }
      }
      pos += run;
      on = !on;
    }
    if (pos != total) throw Error(ErrorCode::Format, "RLE runs do not cover the mask");
    return mask;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("rle_mask: ") + e.what());
  }
}

void write_detections_jsonl(const std::filesystem::path& path, const std::vector<Detection>& detections) {
  std::string text;
  for (const auto& d : detections) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["caption"] = d.caption;
    j["bbox"] = {d.bbox.x0, d.bbox.y0, d.bbox.x1, d.bbox.y1};
    j["rle_mask"] = encode_rle(d.mask);
    text += j.dump();
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<Detection> read_detections_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<Detection> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Detection d;
      d.id = j.at("id").get<std::string>();
      d.caption = j.at("caption").get<std::string>();
      const auto& b = j.at("bbox");
      d.bbox = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
      d.mask = decode_rle(j.at("rle_mask"));
      out.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Scene load_scene(const SceneFiles& files, TrimPercentiles trim) {
  const CameraIntrinsics cam = read_intrinsics(files.intrinsics);
  DepthMap depth = read_depth_png(files.depth);
  return build_scene(cam, std::move(depth), read_detections_jsonl(files.detections), trim);
}

}  // namespace embloc
