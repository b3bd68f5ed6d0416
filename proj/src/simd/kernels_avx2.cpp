#include <immintrin.h>

#include <cstring>

// Tails defer to the scalar table; inline helpers from shared headers are not
// used here so no AVX2-encoded copy of them can leak into other objects.

#include "embloc/simd/kernels.hpp"

namespace embloc::simd {
namespace {

inline void store_mask4(int bits, std::uint8_t* out) {
  out[0] = static_cast<std::uint8_t>(bits & 1);
  out[1] = static_cast<std::uint8_t>((bits >> 1) & 1);
  out[2] = static_cast<std::uint8_t>((bits >> 2) & 1);
  out[3] = static_cast<std::uint8_t>((bits >> 3) & 1);
}

inline void store12(std::uint8_t* dst, __m128i v) {
  _mm_storel_epi64(reinterpret_cast<__m128i*>(dst), v);
  const int tail = _mm_cvtsi128_si32(_mm_srli_si128(v, 8));
  std::memcpy(dst + 8, &tail, 4);
}

bool pack_depth24(const std::uint32_t* depth, std::size_t n, std::uint8_t* rgb) {
  const __m256i shuffle = _mm256_setr_epi8(
      2, 1, 0, 6, 5, 4, 10, 9, 8, 14, 13, 12, -128, -128, -128, -128,
      2, 1, 0, 6, 5, 4, 10, 9, 8, 14, 13, 12, -128, -128, -128, -128);
  __m256i high = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(depth + i));
    high = _mm256_or_si256(high, _mm256_srli_epi32(v, 24));
    const __m256i packed = _mm256_shuffle_epi8(v, shuffle);
    store12(rgb + 3 * i, _mm256_castsi256_si128(packed));
    store12(rgb + 3 * i + 12, _mm256_extracti128_si256(packed, 1));
  }
  bool ok = _mm256_testz_si256(high, high) != 0;
  if (i < n) ok = scalar_kernels().pack_depth24(depth + i, n - i, rgb + 3 * i) && ok;
  return ok;
}

void unpack_depth24(const std::uint8_t* rgb, std::size_t n, std::uint32_t* depth) {
  const __m256i shuffle = _mm256_setr_epi8(
      2, 1, 0, -128, 5, 4, 3, -128, 8, 7, 6, -128, 11, 10, 9, -128,
      2, 1, 0, -128, 5, 4, 3, -128, 8, 7, 6, -128, 11, 10, 9, -128);
  std::size_t i = 0;
  // Each 16-byte load consumes 12; stop early enough that no load reads past 3n.
  for (; i + 10 <= n; i += 8) {
    const __m128i lo = _mm_loadu_si128(reinterpret_cast<const __m128i*>(rgb + 3 * i));
    const __m128i hi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(rgb + 3 * i + 12));
    const __m256i v = _mm256_inserti128_si256(_mm256_castsi128_si256(lo), hi, 1);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(depth + i), _mm256_shuffle_epi8(v, shuffle));
  }
  if (i < n) scalar_kernels().unpack_depth24(rgb + 3 * i, n - i, depth + i);
}

void back_project(const double* x_px, const double* y_px, const double* z, std::size_t n,
                  const PinholeArgs& cam, double* out_x, double* out_y) {
  const __m256d cx = _mm256_set1_pd(cam.cx), cy = _mm256_set1_pd(cam.cy);
  const __m256d fx = _mm256_set1_pd(cam.fx), fy = _mm256_set1_pd(cam.fy);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d zz = _mm256_loadu_pd(z + i);
    const __m256d xs = _mm256_sub_pd(_mm256_loadu_pd(x_px + i), cx);
    const __m256d ys = _mm256_sub_pd(_mm256_loadu_pd(y_px + i), cy);
    _mm256_storeu_pd(out_x + i, _mm256_div_pd(_mm256_mul_pd(xs, zz), fx));
    _mm256_storeu_pd(out_y + i, _mm256_div_pd(_mm256_mul_pd(ys, zz), fy));
  }
  if (i < n) scalar_kernels().back_project(x_px + i, y_px + i, z + i, n - i, cam, out_x + i, out_y + i);
}

void cone_mask(const double* x, const double* y, const double* z, std::size_t n,
               const double apex[3], const double axis[3], double cos2, std::uint8_t* out) {
  const double g2s = axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2];
  const __m256d ax = _mm256_set1_pd(apex[0]), ay = _mm256_set1_pd(apex[1]),
                az = _mm256_set1_pd(apex[2]);
  const __m256d gx = _mm256_set1_pd(axis[0]), gy = _mm256_set1_pd(axis[1]),
                gz = _mm256_set1_pd(axis[2]);
  const __m256d g2 = _mm256_set1_pd(g2s), c2 = _mm256_set1_pd(cos2), zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wx = _mm256_sub_pd(_mm256_loadu_pd(x + i), ax);
    const __m256d wy = _mm256_sub_pd(_mm256_loadu_pd(y + i), ay);
    const __m256d wz = _mm256_sub_pd(_mm256_loadu_pd(z + i), az);
    const __m256d d = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(wx, gx), _mm256_mul_pd(wy, gy)), _mm256_mul_pd(wz, gz));
    const __m256d w2 = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(wx, wx), _mm256_mul_pd(wy, wy)), _mm256_mul_pd(wz, wz));
    const __m256d ratio = _mm256_div_pd(_mm256_mul_pd(d, d), _mm256_mul_pd(w2, g2));
    const __m256d ok = _mm256_and_pd(_mm256_cmp_pd(d, zero, _CMP_GT_OQ),
                                     _mm256_cmp_pd(ratio, c2, _CMP_GE_OQ));
    store_mask4(_mm256_movemask_pd(ok), out + i);
  }
  if (i < n) scalar_kernels().cone_mask(x + i, y + i, z + i, n - i, apex, axis, cos2, out + i);
}

void corridor_mask(const double* x, const double* y, const double* z, std::size_t n,
                   const double a[3], const double b[3], double lo, double hi, double radius,
                   std::uint8_t* out) {
  const double sxs = b[0] - a[0], sys = b[1] - a[1], szs = b[2] - a[2];
  const double s2s = sxs * sxs + sys * sys + szs * szs;
  const double r2s = radius * radius;
  const __m256d ax = _mm256_set1_pd(a[0]), ay = _mm256_set1_pd(a[1]), az = _mm256_set1_pd(a[2]);
  const __m256d sx = _mm256_set1_pd(sxs), sy = _mm256_set1_pd(sys), sz = _mm256_set1_pd(szs);
  const __m256d s2 = _mm256_set1_pd(s2s), r2 = _mm256_set1_pd(r2s);
  const __m256d vlo = _mm256_set1_pd(lo), vhi = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wx = _mm256_sub_pd(_mm256_loadu_pd(x + i), ax);
    const __m256d wy = _mm256_sub_pd(_mm256_loadu_pd(y + i), ay);
    const __m256d wz = _mm256_sub_pd(_mm256_loadu_pd(z + i), az);
    const __m256d d = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(wx, sx), _mm256_mul_pd(wy, sy)), _mm256_mul_pd(wz, sz));
    const __m256d t = _mm256_div_pd(d, s2);
    const __m256d cx = _mm256_sub_pd(_mm256_mul_pd(wy, sz), _mm256_mul_pd(wz, sy));
    const __m256d cy = _mm256_sub_pd(_mm256_mul_pd(wz, sx), _mm256_mul_pd(wx, sz));
    const __m256d cz = _mm256_sub_pd(_mm256_mul_pd(wx, sy), _mm256_mul_pd(wy, sx));
    const __m256d c2 = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(cx, cx), _mm256_mul_pd(cy, cy)), _mm256_mul_pd(cz, cz));
    const __m256d perp2 = _mm256_div_pd(c2, s2);
    __m256d ok = _mm256_and_pd(_mm256_cmp_pd(t, vlo, _CMP_GE_OQ), _mm256_cmp_pd(t, vhi, _CMP_LE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(perp2, r2, _CMP_LE_OQ));
    store_mask4(_mm256_movemask_pd(ok), out + i);
  }
  if (i < n) scalar_kernels().corridor_mask(x + i, y + i, z + i, n - i, a, b, lo, hi, radius, out + i);
}

void box_mask(const double* x, const double* y, const double* z, std::size_t n,
              const double center[3], const double half[3], double inflation, std::uint8_t* out) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d cx = _mm256_set1_pd(center[0]), cy = _mm256_set1_pd(center[1]),
                cz = _mm256_set1_pd(center[2]);
  const __m256d hx = _mm256_set1_pd(half[0]), hy = _mm256_set1_pd(half[1]),
                hz = _mm256_set1_pd(half[2]);
  const __m256d inf = _mm256_set1_pd(inflation);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d rx = _mm256_div_pd(_mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(x + i), cx)), hx);
    const __m256d ry = _mm256_div_pd(_mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(y + i), cy)), hy);
    const __m256d rz = _mm256_div_pd(_mm256_andnot_pd(sign, _mm256_sub_pd(_mm256_loadu_pd(z + i), cz)), hz);
    __m256d ok = _mm256_and_pd(_mm256_cmp_pd(rx, inf, _CMP_LE_OQ), _mm256_cmp_pd(ry, inf, _CMP_LE_OQ));
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(rz, inf, _CMP_LE_OQ));
    store_mask4(_mm256_movemask_pd(ok), out + i);
  }
  if (i < n) scalar_kernels().box_mask(x + i, y + i, z + i, n - i, center, half, inflation, out + i);
}

}  // namespace

const KernelTable& avx2_kernel_table() noexcept {
  static const KernelTable table{"avx2",    pack_depth24,  unpack_depth24, back_project,
                                 cone_mask, corridor_mask, box_mask};
  return table;
}

}  // namespace embloc::simd
