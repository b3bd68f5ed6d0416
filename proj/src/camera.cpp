#include "embloc/camera.hpp"

#include <algorithm>
#include <sstream>

#include "embloc/error.hpp"

namespace embloc {

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  if (width < 1 || height < 1) throw Error(ErrorCode::InvalidArgument, "image size must be at least 1x1");
  if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height)) {
    throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
  }
}

PixelCoord normalized_to_pixel(int u, int v, int width, int height) noexcept {
  return {(u + 0.5) * width / kNormalizedGrid, (v + 0.5) * height / kNormalizedGrid};
}

PixelCoord normalized_to_pixel(const PointTarget& t, const CameraIntrinsics& cam) noexcept {
  return normalized_to_pixel(t.u, t.v, cam.width, cam.height);
}

NormalizedCoord pixel_to_normalized(double x_px, double y_px, int width, int height) {
  if (!(x_px >= 0 && x_px < width && y_px >= 0 && y_px < height)) {
    std::ostringstream os;
    os << "pixel (" << x_px << ", " << y_px << ") outside " << width << "x" << height;
    throw Error(ErrorCode::OutOfImage, os.str());
  }
  auto to_grid = [](double p, int size) {
    const auto g = static_cast<int>(std::floor(p * kNormalizedGrid / size));
    return std::clamp(g, 0, kNormalizedGrid - 1);
  };
  return {to_grid(x_px, width), to_grid(y_px, height)};
}

NormalizedCoord pixel_to_normalized(double x_px, double y_px, const CameraIntrinsics& cam) {
  return pixel_to_normalized(x_px, y_px, cam.width, cam.height);
}

PixelIndex normalized_cell_pixel(int u, int v, int width, int height) noexcept {
  const PixelCoord p = normalized_to_pixel(u, v, width, height);
  return {std::clamp(static_cast<int>(std::floor(p.x)), 0, width - 1),
          std::clamp(static_cast<int>(std::floor(p.y)), 0, height - 1)};
}

Point3 back_project_pixel(double x_px, double y_px, double z_mm, const CameraIntrinsics& cam) noexcept {
  return {(x_px - cam.cx) * z_mm / cam.fx, (y_px - cam.cy) * z_mm / cam.fy, z_mm};
}

Point3 back_project(const PointTarget& t, const CameraIntrinsics& cam) {
  if (t.z == 0) throw Error(ErrorCode::DegenerateDepth, "cannot back-project a target with Z = 0");
  const PixelCoord px = normalized_to_pixel(t, cam);
  return back_project_pixel(px.x, px.y, static_cast<double>(t.z), cam);
}

PointTarget project(const Point3& p, const CameraIntrinsics& cam) {
  if (!(p.z > 0)) throw Error(ErrorCode::BehindCamera, "point " + to_string(p) + " has Z <= 0");
  const double x_px = cam.fx * p.x / p.z + cam.cx;
  const double y_px = cam.fy * p.y / p.z + cam.cy;
  if (!(x_px >= 0 && x_px < cam.width && y_px >= 0 && y_px < cam.height)) {
    throw Error(ErrorCode::OutOfFrustum, "point " + to_string(p) + " projects outside the image");
  }
  const double z = std::round(p.z);
  if (z > INT32_MAX) throw Error(ErrorCode::OutOfFrustum, "depth beyond representable range");
  const NormalizedCoord n = pixel_to_normalized(x_px, y_px, cam);
  return {n.u, n.v, static_cast<std::int32_t>(z)};
}

nlohmann::json to_json(const CameraIntrinsics& cam) {
  return {{"fx", cam.fx}, {"fy", cam.fy}, {"cx", cam.cx},
          {"cy", cam.cy}, {"width", cam.width}, {"height", cam.height}};
}

CameraIntrinsics intrinsics_from_json(const nlohmann::json& j) {
  CameraIntrinsics cam;
  try {
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("intrinsics: ") + e.what());
  }
  cam.validate();
  return cam;
}

std::string to_string(const Point3& p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ", " << p.z << ")";
  return os.str();
}

}  // namespace embloc
