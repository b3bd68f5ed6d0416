#include "embloc/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "embloc/detail/predicates.hpp"
#include "embloc/error.hpp"
#include "embloc/simd/kernels.hpp"

namespace embloc {

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BBox Mask::bounding_box() const {
  int x0 = width_, y0 = height_, x1 = -1, y1 = -1;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (!at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw Error(ErrorCode::DegenerateObject, "empty mask has no bounding box");
  return {static_cast<double>(x0), static_cast<double>(y0), x1 + 1.0, y1 + 1.0};
}

bool ProxyBox::contains(const Point3& p, double inflation) const noexcept {
  return detail::box_accept(p.x, p.y, p.z, center.x, center.y, center.z, half_extents.x,
                            half_extents.y, half_extents.z, inflation);
}

const SceneObject* Scene::find(std::string_view id) const noexcept {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const SceneObject& Scene::at(std::string_view id) const {
  const SceneObject* o = find(id);
  if (o == nullptr) throw Error(ErrorCode::InvalidArgument, "unknown object id '" + std::string(id) + "'");
  return *o;
}

std::vector<Point3> lift_object(const Mask& mask, const DepthMap& depth, const CameraIntrinsics& cam) {
  if (mask.width() != depth.width() || mask.height() != depth.height()) {
    throw Error(ErrorCode::InvalidArgument, "mask and depth map sizes differ");
  }
  std::vector<double> xs, ys, zs;
  std::size_t masked = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      ++masked;
      const std::uint32_t z = depth.at(x, y);
      if (z == 0) continue;
      xs.push_back(x + 0.5);
      ys.push_back(y + 0.5);
      zs.push_back(static_cast<double>(z));
    }
  }
  if (masked == 0) throw Error(ErrorCode::InvalidArgument, "empty mask");
  if (2 * xs.size() < masked) {
    throw Error(ErrorCode::InsufficientDepth, std::to_string(xs.size()) + " of " +
                                                  std::to_string(masked) +
                                                  " masked pixels have valid depth");
  }
  std::vector<double> out_x(xs.size()), out_y(xs.size());
  simd::active_kernels().back_project(xs.data(), ys.data(), zs.data(), xs.size(),
                                      {cam.fx, cam.fy, cam.cx, cam.cy}, out_x.data(), out_y.data());
  std::vector<Point3> points(xs.size());
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = {out_x[i], out_y[i], zs[i]};
  return points;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(i);
  return frac == 0.0 ? values[i] : values[i] + frac * (values[i + 1] - values[i]);
}

ProxyBox build_proxy_box(std::span<const Point3> points, TrimPercentiles trim) {
  if (points.size() < 3) {
    throw Error(ErrorCode::DegenerateObject,
                "proxy box needs at least 3 points, got " + std::to_string(points.size()));
  }
  if (!(trim.lo >= 0 && trim.lo < trim.hi && trim.hi <= 1)) {
    throw Error(ErrorCode::InvalidArgument, "trim percentiles must satisfy 0 <= lo < hi <= 1");
  }
  std::vector<double> coords(points.size());
  auto span_of = [&](double Point3::*axis, double& center, double& half) {
    std::transform(points.begin(), points.end(), coords.begin(), [&](const Point3& p) { return p.*axis; });
    const double lo = percentile(coords, trim.lo);
    const double hi = percentile(coords, trim.hi);
    center = 0.5 * (lo + hi);
    half = std::max(0.5 * (hi - lo), kMinHalfExtentMm);
  };
  ProxyBox box;
  span_of(&Point3::x, box.center.x, box.half_extents.x);
  span_of(&Point3::y, box.center.y, box.half_extents.y);
  span_of(&Point3::z, box.center.z, box.half_extents.z);
  return box;
}

double body_length(const ProxyBox& box) noexcept { return norm(box.half_extents); }

bool is_occupied(const Point3& p, const Scene& scene, std::span<const std::string> exclude,
                 double inflation) {
  for (const auto& o : scene.objects) {
    if (std::find(exclude.begin(), exclude.end(), o.id) != exclude.end()) continue;
    if (o.proxy.contains(p, inflation)) return true;
  }
  return false;
}

Scene build_scene(const CameraIntrinsics& cam, DepthMap depth, std::vector<Detection> detections,
                  TrimPercentiles trim) {
  cam.validate();
  if (depth.width() != cam.width || depth.height() != cam.height) {
    throw Error(ErrorCode::InvalidArgument, "depth map size does not match intrinsics");
  }
  Scene scene{cam, std::move(depth), {}};
  std::set<std::string> ids;
  for (auto& det : detections) {
    if (!ids.insert(det.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate object id '" + det.id + "'");
    if (det.mask.width() != cam.width || det.mask.height() != cam.height) {
      throw Error(ErrorCode::InvalidArgument, "mask of '" + det.id + "' has the wrong size");
    }
    if (det.mask.count() == 0) throw Error(ErrorCode::InvalidArgument, "mask of '" + det.id + "' is empty");
    const BBox& b = det.bbox;
    if (b.x0 < 0 || b.y0 < 0 || b.x1 > cam.width || b.y1 > cam.height || b.x0 > b.x1 || b.y0 > b.y1) {
      throw Error(ErrorCode::InvalidArgument, "bbox of '" + det.id + "' lies outside the image");
    }
    for (int y = 0; y < cam.height; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        if (det.mask.at(x, y) && !b.contains_pixel(x, y)) {
          throw Error(ErrorCode::InvalidArgument, "mask of '" + det.id + "' leaves its bbox");
        }
      }
    }
    const auto points = lift_object(det.mask, scene.depth, cam);
    const ProxyBox proxy = build_proxy_box(points, trim);
    scene.objects.push_back({std::move(det.id), std::move(det.caption), b, std::move(det.mask), proxy});
  }
  return scene;
}

}  // namespace embloc
