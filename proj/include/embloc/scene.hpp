#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "embloc/camera.hpp"
#include "embloc/depth.hpp"

namespace embloc {

/// Pixel rectangle; pixel (x, y) is inside when its center lies in [x0,x1] x [y0,y1].
struct BBox {
  double x0 = 0;
  double y0 = 0;
  double x1 = 0;
  double y1 = 0;

  bool contains_pixel(int x, int y) const noexcept {
    return x + 0.5 >= x0 && x + 0.5 <= x1 && y + 0.5 >= y0 && y + 0.5 <= y1;
  }

  bool operator==(const BBox&) const = default;
};

/// Per-pixel boolean image, row-major.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height)
      : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const { return bits_[idx(x, y)] != 0; }
  void set(int x, int y, bool on = true) { bits_[idx(x, y)] = on ? 1 : 0; }
  std::size_t count() const noexcept;
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  /// Tight box around the set pixels (x1, y1 exclusive edges of the last pixel).
  BBox bounding_box() const;

  bool operator==(const Mask&) const = default;

 private:
  std::size_t idx(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Axis-aligned camera-frame proxy volume. Its center is the object's anchor.
struct ProxyBox {
  Point3 center;
  Point3 half_extents;

  /// Closed box test with half-extents scaled by `inflation`.
  bool contains(const Point3& p, double inflation = 1.0) const noexcept;

  bool operator==(const ProxyBox&) const = default;
};

struct TrimPercentiles {
  double lo = 0.02;
  double hi = 0.98;
};

inline constexpr double kDefaultInflation = 1.10;
inline constexpr double kMinHalfExtentMm = 1.0;

struct SceneObject {
  std::string id;
  std::string caption;
  BBox bbox;
  Mask mask;
  ProxyBox proxy;
};

/// Detector output for one object, before lifting.
struct Detection {
  std::string id;
  std::string caption;
  BBox bbox;
  Mask mask;
};

struct Scene {
  CameraIntrinsics cam;
  DepthMap depth;
  std::vector<SceneObject> objects;

  /// Null when no object carries `id`.
  const SceneObject* find(std::string_view id) const noexcept;
  const SceneObject& at(std::string_view id) const;
};

/// One camera-frame point per valid masked pixel, taken at the pixel center.
/// Throws Error(InsufficientDepth) when fewer than half the masked pixels have depth.
std::vector<Point3> lift_object(const Mask& mask, const DepthMap& depth, const CameraIntrinsics& cam);

/// Per-axis percentile span; half-extents floored at 1 mm.
/// Throws Error(DegenerateObject) for fewer than 3 points.
ProxyBox build_proxy_box(std::span<const Point3> points, TrimPercentiles trim = {});

/// Half the proxy diagonal, i.e. |half_extents|.
double body_length(const ProxyBox& box) noexcept;

/// True iff p is inside any inflated proxy whose object id is not excluded.
bool is_occupied(const Point3& p, const Scene& scene, std::span<const std::string> exclude,
                 double inflation = kDefaultInflation);

/// Validates detections, lifts each one and builds its proxy.
Scene build_scene(const CameraIntrinsics& cam, DepthMap depth, std::vector<Detection> detections,
                  TrimPercentiles trim = {});

/// Linear-interpolated percentile of an unsorted sample, q in [0,1].
double percentile(std::vector<double> values, double q);

}  // namespace embloc
