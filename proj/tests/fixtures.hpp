#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "embloc/camera.hpp"
#include "embloc/scene.hpp"

namespace fixtures {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("embloc_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// 1000 x 1000 image, unit focal scale, principal point on a pixel center:
// u = 500 maps to X = 0 and every target back-projects to (u - 500, v - 500) * Z / 1000.
inline embloc::CameraIntrinsics grid_camera() { return {1000, 1000, 500.5, 500.5, 1000, 1000}; }

inline embloc::SceneObject proxy_object(const std::string& id, embloc::Point3 center, embloc::Point3 half) {
  embloc::SceneObject o;
  o.id = id;
  o.caption = id;
  o.proxy = {center, half};
  return o;
}

}  // namespace fixtures
