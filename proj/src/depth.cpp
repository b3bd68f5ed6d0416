#include "embloc/depth.hpp"

#include <algorithm>
#include <cmath>

#include "embloc/error.hpp"
#include "embloc/simd/kernels.hpp"

namespace embloc {

DepthMap::DepthMap(int width, int height)
    : DepthMap(width, height, std::vector<std::uint32_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                         static_cast<std::size_t>(std::max(height, 0)))) {}

DepthMap::DepthMap(int width, int height, std::vector<std::uint32_t> values_mm)
    : width_(width), height_(height), values_(std::move(values_mm)) {
  if (width < 0 || height < 0) throw Error(ErrorCode::InvalidArgument, "negative depth map size");
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidArgument, "depth value count does not match dimensions");
  }
}

std::vector<std::uint8_t> DepthMap::valid_mask() const {
  std::vector<std::uint8_t> mask(values_.size());
  std::transform(values_.begin(), values_.end(), mask.begin(),
                 [](std::uint32_t v) { return static_cast<std::uint8_t>(v != 0); });
  return mask;
}

std::uint32_t lookup(const DepthMap& d, int u, int v) {
  if (u < 0 || u >= kNormalizedGrid || v < 0 || v >= kNormalizedGrid) {
    throw Error(ErrorCode::InvalidArgument, "normalized coordinate outside [0,1000)");
  }
  const PixelIndex px = normalized_cell_pixel(u, v, d.width(), d.height());
  const std::uint32_t z = d.at(px.x, px.y);
  if (z == 0) throw InvalidDepthError(px.x, px.y);
  return z;
}

std::uint32_t lookup(const DepthMap& d, const PointTarget& t) { return lookup(d, t.u, t.v); }

EncodedDepthImage encode_depth_3ch(const DepthMap& d) {
  EncodedDepthImage e{d.width(), d.height(), std::vector<std::uint8_t>(3 * d.size())};
  const auto values = d.values();
  if (!simd::active_kernels().pack_depth24(values.data(), values.size(), e.data.data())) {
    const auto it = std::find_if(values.begin(), values.end(),
                                 [](std::uint32_t v) { return v > kMaxEncodableDepth; });
    const auto i = static_cast<std::size_t>(it - values.begin());
    throw Error(ErrorCode::DepthOverflow,
                "depth " + std::to_string(*it) + " mm at pixel (" + std::to_string(i % d.width()) +
                    ", " + std::to_string(i / d.width()) + ") does not fit in 24 bits");
  }
  return e;
}

DepthMap decode_depth_3ch(const EncodedDepthImage& e) {
  const std::size_t n = static_cast<std::size_t>(e.width) * static_cast<std::size_t>(e.height);
  if (e.data.size() != 3 * n) throw Error(ErrorCode::Format, "encoded depth buffer has wrong size");
  std::vector<std::uint32_t> values(n);
  simd::active_kernels().unpack_depth24(e.data.data(), n, values.data());
  return DepthMap(e.width, e.height, std::move(values));
}

void GeometryVolume::validate() const {
  if (!(min.x < max.x) || !(min.y < max.y) || !(min.z < max.z)) {
    throw Error(ErrorCode::BadVolume, "volume min must be below max on every axis");
  }
}

std::uint8_t quantize_axis(double value, double lo, double hi) noexcept {
  const double q = std::round((value - lo) / (hi - lo) * 255.0);
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

double dequantize_axis(std::uint8_t code, double lo, double hi) noexcept {
  return lo + (hi - lo) * code / 255.0;
}

EncodedDepthImage encode_geometry_map(const DepthMap& d, const CameraIntrinsics& cam,
                                      const GeometryVolume& volume) {
  volume.validate();
  cam.validate();
  if (cam.width != d.width() || cam.height != d.height()) {
    throw Error(ErrorCode::InvalidArgument, "depth map and intrinsics disagree on image size");
  }
  const auto& kernels = simd::active_kernels();
  const simd::PinholeArgs pin{cam.fx, cam.fy, cam.cx, cam.cy};
  const auto w = static_cast<std::size_t>(d.width());
  std::vector<double> xs(w), ys(w), zs(w), out_x(w), out_y(w);
  for (std::size_t x = 0; x < w; ++x) xs[x] = static_cast<double>(x) + 0.5;

  EncodedDepthImage e{d.width(), d.height(), std::vector<std::uint8_t>(3 * d.size())};
  for (int y = 0; y < d.height(); ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::uint32_t z = d.at(static_cast<int>(x), y);
      if (z == 0) throw InvalidDepthError(static_cast<int>(x), y);
      zs[x] = z;
    }
    std::fill(ys.begin(), ys.end(), y + 0.5);
    kernels.back_project(xs.data(), ys.data(), zs.data(), w, pin, out_x.data(), out_y.data());
    std::uint8_t* row = e.data.data() + 3 * w * static_cast<std::size_t>(y);
    for (std::size_t x = 0; x < w; ++x) {
      row[3 * x + 0] = quantize_axis(out_x[x], volume.min.x, volume.max.x);
      row[3 * x + 1] = quantize_axis(out_y[x], volume.min.y, volume.max.y);
      row[3 * x + 2] = quantize_axis(zs[x], volume.min.z, volume.max.z);
    }
  }
  return e;
}

}  // namespace embloc
