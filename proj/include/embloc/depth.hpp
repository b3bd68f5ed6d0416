#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "embloc/camera.hpp"

namespace embloc {

/// Largest depth representable by the 24-bit channel encoding.
inline constexpr std::uint32_t kMaxEncodableDepth = (1u << 24) - 1;

/// Per-pixel metric depth in integer millimeters, row-major. A value of 0 is a
/// hole; the validity mask is exactly the set of nonzero pixels.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height);
  DepthMap(int width, int height, std::vector<std::uint32_t> values_mm);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::uint32_t at(int x, int y) const { return values_[index(x, y)]; }
  bool valid(int x, int y) const { return at(x, y) != 0; }
  void set(int x, int y, std::uint32_t mm) { values_[index(x, y)] = mm; }

  std::span<const std::uint32_t> values() const noexcept { return values_; }
  std::span<std::uint32_t> values() noexcept { return values_; }

  std::vector<std::uint8_t> valid_mask() const;

  bool operator==(const DepthMap&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint32_t> values_;
};

/// Three uint8 channels per pixel, interleaved row-major.
struct EncodedDepthImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  std::span<const std::uint8_t, 3> pixel(int x, int y) const {
    return std::span<const std::uint8_t, 3>(data.data() + 3 * (static_cast<std::size_t>(y) * width + x), 3);
  }

  bool operator==(const EncodedDepthImage&) const = default;
};

/// Depth at the pixel holding the center of t's normalized cell.
/// Throws InvalidDepthError on holes.
std::uint32_t lookup(const DepthMap& d, const PointTarget& t);
std::uint32_t lookup(const DepthMap& d, int u, int v);

/// Big-endian split: ch0 = Z >> 16, ch1 = (Z >> 8) & 255, ch2 = Z & 255.
/// Throws Error(DepthOverflow) if any value is >= 2^24.
EncodedDepthImage encode_depth_3ch(const DepthMap& d);
DepthMap decode_depth_3ch(const EncodedDepthImage& e);

/// Camera-frame volume used to quantize the XYZ geometry map.
struct GeometryVolume {
  Point3 min{-2000, -2000, 0};
  Point3 max{2000, 2000, 5000};

  /// Throws Error(BadVolume) when min >= max on any axis.
  void validate() const;
};

/// Affine map of [lo, hi] onto 0..255 with clamping.
std::uint8_t quantize_axis(double value, double lo, double hi) noexcept;
double dequantize_axis(std::uint8_t code, double lo, double hi) noexcept;

/// Back-projects every pixel and quantizes X, Y, Z into the three channels.
/// Throws InvalidDepthError if the map has holes.
EncodedDepthImage encode_geometry_map(const DepthMap& d, const CameraIntrinsics& cam,
                                      const GeometryVolume& volume = {});

}  // namespace embloc
