#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "json.hpp"

namespace embloc {

/// Side length of the normalized image grid: u, v are integers in [0, 1000).
inline constexpr int kNormalizedGrid = 1000;

struct CameraIntrinsics {
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
  int width = 0;
  int height = 0;

  /// Throws Error(InvalidArgument) when a field violates the pinhole invariants.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// The universal prediction/label unit: normalized column, row, and depth in mm.
struct PointTarget {
  int u = 0;
  int v = 0;
  std::int32_t z = 0;

  bool valid() const noexcept {
    return u >= 0 && u < kNormalizedGrid && v >= 0 && v < kNormalizedGrid && z >= 0;
  }

  bool operator==(const PointTarget&) const = default;
};

/// Camera-frame point in mm. +X right, +Y down, +Z forward.
struct Point3 {
  double x = 0;
  double y = 0;
  double z = 0;

  bool operator==(const Point3&) const = default;
};

inline Point3 operator+(Point3 a, Point3 b) noexcept { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(Point3 a, Point3 b) noexcept { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double k, Point3 a) noexcept { return {k * a.x, k * a.y, k * a.z}; }
inline double dot(Point3 a, Point3 b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Point3 cross(Point3 a, Point3 b) noexcept {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm2(Point3 a) noexcept { return dot(a, a); }
inline double norm(Point3 a) noexcept { return std::sqrt(norm2(a)); }
inline bool is_finite(Point3 a) noexcept {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

struct PixelCoord {
  double x = 0;
  double y = 0;
};

struct NormalizedCoord {
  int u = 0;
  int v = 0;

  bool operator==(const NormalizedCoord&) const = default;
};

/// Integer pixel index.
struct PixelIndex {
  int x = 0;
  int y = 0;

  bool operator==(const PixelIndex&) const = default;
};

/// Center of the normalized cell (u, v) in pixel units of a width x height image.
PixelCoord normalized_to_pixel(int u, int v, int width, int height) noexcept;
PixelCoord normalized_to_pixel(const PointTarget& t, const CameraIntrinsics& cam) noexcept;

/// Throws Error(OutOfImage) for pixels outside [0,width) x [0,height).
NormalizedCoord pixel_to_normalized(double x_px, double y_px, int width, int height);
NormalizedCoord pixel_to_normalized(double x_px, double y_px, const CameraIntrinsics& cam);

/// Pixel whose area contains the center of the normalized cell.
PixelIndex normalized_cell_pixel(int u, int v, int width, int height) noexcept;

Point3 back_project_pixel(double x_px, double y_px, double z_mm, const CameraIntrinsics& cam) noexcept;

/// Throws Error(DegenerateDepth) when t.z == 0.
Point3 back_project(const PointTarget& t, const CameraIntrinsics& cam);

/// Throws Error(BehindCamera) for p.z <= 0 and Error(OutOfFrustum) when the
/// image of p falls outside the frame.
PointTarget project(const Point3& p, const CameraIntrinsics& cam);

nlohmann::json to_json(const CameraIntrinsics& cam);
CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);

std::string to_string(const Point3& p);

}  // namespace embloc
