#include "embloc/detail/predicates.hpp"
#include "embloc/simd/kernels.hpp"

namespace embloc::simd {
namespace {

bool pack_depth24(const std::uint32_t* depth, std::size_t n, std::uint8_t* rgb) {
  std::uint32_t high = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t z = depth[i];
    high |= z >> 24;
    rgb[3 * i + 0] = static_cast<std::uint8_t>(z >> 16);
    rgb[3 * i + 1] = static_cast<std::uint8_t>(z >> 8);
    rgb[3 * i + 2] = static_cast<std::uint8_t>(z);
  }
  return high == 0;
}

void unpack_depth24(const std::uint8_t* rgb, std::size_t n, std::uint32_t* depth) {
  for (std::size_t i = 0; i < n; ++i) {
    depth[i] = (std::uint32_t{rgb[3 * i]} << 16) | (std::uint32_t{rgb[3 * i + 1]} << 8) |
               std::uint32_t{rgb[3 * i + 2]};
  }
}

void back_project(const double* x_px, const double* y_px, const double* z, std::size_t n,
                  const PinholeArgs& cam, double* out_x, double* out_y) {
  for (std::size_t i = 0; i < n; ++i) {
    out_x[i] = (x_px[i] - cam.cx) * z[i] / cam.fx;
    out_y[i] = (y_px[i] - cam.cy) * z[i] / cam.fy;
  }
}

void cone_mask(const double* x, const double* y, const double* z, std::size_t n,
               const double apex[3], const double axis[3], double cos2, std::uint8_t* out) {
  const double g2 = axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2];
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = detail::cone_accept(x[i] - apex[0], y[i] - apex[1], z[i] - apex[2], axis[0],
                                 axis[1], axis[2], g2, cos2);
  }
}

void corridor_mask(const double* x, const double* y, const double* z, std::size_t n,
                   const double a[3], const double b[3], double lo, double hi, double radius,
                   std::uint8_t* out) {
  const double sx = b[0] - a[0], sy = b[1] - a[1], sz = b[2] - a[2];
  const double s2 = sx * sx + sy * sy + sz * sz;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = detail::corridor_accept(x[i] - a[0], y[i] - a[1], z[i] - a[2], sx, sy, sz, s2, lo,
                                     hi, r2);
  }
}

void box_mask(const double* x, const double* y, const double* z, std::size_t n,
              const double center[3], const double half[3], double inflation, std::uint8_t* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = detail::box_accept(x[i], y[i], z[i], center[0], center[1], center[2], half[0],
                                half[1], half[2], inflation);
  }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{"scalar",     pack_depth24,  unpack_depth24, back_project,
                                 cone_mask,    corridor_mask, box_mask};
  return table;
}

}  // namespace embloc::simd
