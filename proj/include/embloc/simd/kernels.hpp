#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and, where the
// build and CPU allow, an AVX2 variant that must produce bit-identical output.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace embloc::simd {

struct PinholeArgs {
  double fx, fy, cx, cy;
};

struct KernelTable {
  std::string_view name;

  /// Splits each depth into three big-endian bytes. Returns false if any
  /// value is >= 2^24 (output then unspecified).
  bool (*pack_depth24)(const std::uint32_t* depth, std::size_t n, std::uint8_t* rgb);

  void (*unpack_depth24)(const std::uint8_t* rgb, std::size_t n, std::uint32_t* depth);

  /// X = (x_px - cx) * z / fx, Y = (y_px - cy) * z / fy.
  void (*back_project)(const double* x_px, const double* y_px, const double* z, std::size_t n,
                       const PinholeArgs& cam, double* out_x, double* out_y);

  void (*cone_mask)(const double* x, const double* y, const double* z, std::size_t n,
                    const double apex[3], const double axis[3], double cos2, std::uint8_t* out);

  void (*corridor_mask)(const double* x, const double* y, const double* z, std::size_t n,
                        const double a[3], const double b[3], double lo, double hi,
                        double radius, std::uint8_t* out);

  void (*box_mask)(const double* x, const double* y, const double* z, std::size_t n,
                   const double center[3], const double half[3], double inflation,
                   std::uint8_t* out);
};

const KernelTable& scalar_kernels() noexcept;

/// Null when the library was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_kernels() noexcept;

/// Best available table. Setting EMBLOC_SIMD=scalar in the environment forces
/// the reference path.
const KernelTable& active_kernels() noexcept;

}  // namespace embloc::simd
