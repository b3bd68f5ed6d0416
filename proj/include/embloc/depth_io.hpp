#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "embloc/camera.hpp"
#include "embloc/depth.hpp"
#include "json.hpp"

namespace embloc {

/// Sidecar JSON that accompanies an image file: same path, ".json" extension.
std::filesystem::path sidecar_path(const std::filesystem::path& image);

/// 16-bit grayscale PNG in millimeters plus a sidecar declaring units.
/// Throws Error(DepthOverflow) for values >= 65536 mm.
void write_depth_png(const std::filesystem::path& path, const DepthMap& d);

/// Reads a 16-bit grayscale depth PNG. If a sidecar exists its units must be mm.
DepthMap read_depth_png(const std::filesystem::path& path);

/// 8-bit RGB PNG of an encoded depth image; the sidecar records the channel layout.
void write_encoded_depth_png(const std::filesystem::path& path, const EncodedDepthImage& e,
                             const nlohmann::json& layout);
EncodedDepthImage read_rgb_png(const std::filesystem::path& path);

void write_rgb_png(const std::filesystem::path& path, int width, int height,
                   std::span<const std::uint8_t> rgb);

void write_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& cam);
CameraIntrinsics read_intrinsics(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Sidecar layout for the big-endian 24-bit depth encoding.
nlohmann::json depth24_layout();

}  // namespace embloc
