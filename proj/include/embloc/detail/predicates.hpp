#pragma once

// Scalar forms of the membership tests. The AVX2 kernels replicate these
// operation-for-operation so both paths round identically; keep them in sync.

#include <cmath>

namespace embloc::detail {

/// Cone test on displacement w against an unnormalized axis g with |g|^2 = g2.
/// Accepts iff angle(w, g) <= alpha, given cos2 = cos^2(alpha) and alpha < 90 deg.
inline bool cone_accept(double wx, double wy, double wz, double gx, double gy, double gz,
                        double g2, double cos2) noexcept {
  const double d = wx * gx + wy * gy + wz * gz;
  const double w2 = wx * wx + wy * wy + wz * wz;
  return d > 0.0 && (d * d) / (w2 * g2) >= cos2;
}

/// Corridor test on w = p - a against segment s = b - a with s2 = |s|^2.
inline bool corridor_accept(double wx, double wy, double wz, double sx, double sy, double sz,
                            double s2, double lo, double hi, double radius2) noexcept {
  const double d = wx * sx + wy * sy + wz * sz;
  const double t = d / s2;
  const double cx = wy * sz - wz * sy;
  const double cy = wz * sx - wx * sz;
  const double cz = wx * sy - wy * sx;
  const double perp2 = (cx * cx + cy * cy + cz * cz) / s2;
  return t >= lo && t <= hi && perp2 <= radius2;
}

/// Closed inflated box: |p_i - c_i| / h_i <= inflation on every axis.
inline bool box_accept(double px, double py, double pz, double cx, double cy, double cz,
                       double hx, double hy, double hz, double inflation) noexcept {
  return std::fabs(px - cx) / hx <= inflation && std::fabs(py - cy) / hy <= inflation &&
         std::fabs(pz - cz) / hz <= inflation;
}

}  // namespace embloc::detail
