#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "embloc/error.hpp"
#include "embloc/rng.hpp"
#include "embloc/scene.hpp"
#include "embloc/scene_io.hpp"
#include "fixtures.hpp"

using namespace embloc;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Format;
}

Mask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  Mask m(w, h);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) m.set(x, y);
  }
  return m;
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("percentile interpolates linearly between order statistics") {
  CHECK(percentile({10, 20, 30, 40}, 0.5) == 25);
  CHECK(percentile({5, 1, 4, 2, 3}, 0.02) == doctest::Approx(1.08));
  CHECK(percentile({5, 1, 4, 2, 3}, 0.98) == doctest::Approx(4.92));
  CHECK(percentile({7}, 0.3) == 7);
  CHECK(percentile({1, 2}, 1.0) == 2);
  CHECK(percentile({1, 2}, 0.0) == 1);
}

TEST_CASE("proxy box of a dense grid without trimming is the grid's extent") {
  std::vector<Point3> pts;
  for (int x = -50; x <= 50; x += 5) {
    for (int y = 0; y <= 20; y += 5) {
      for (int z = 1000; z <= 1100; z += 10) pts.push_back({double(x), double(y), double(z)});
    }
  }
  const ProxyBox b = build_proxy_box(pts, {0.0, 1.0});
  CHECK(b.center == Point3{0, 10, 1050});
  CHECK(b.half_extents == Point3{50, 10, 50});
}

TEST_CASE("default trim drops outliers") {
  std::vector<Point3> pts;
  for (int i = 0; i < 100; ++i) pts.push_back({double(i % 10), double(i / 10), 1000});
  pts.push_back({5000, 5000, 9000});
  const ProxyBox b = build_proxy_box(pts);
  CHECK(b.center.x + b.half_extents.x < 10);
  CHECK(b.center.z + b.half_extents.z < 1001.5);
}

TEST_CASE("half extents are floored at one millimetre") {
  const std::vector<Point3> flat = {{0, 0, 1000}, {10, 0, 1000}, {0, 10, 1000}, {10, 10, 1000}};
  const ProxyBox b = build_proxy_box(flat, {0, 1});
  CHECK(b.half_extents.z == kMinHalfExtentMm);
  CHECK(b.half_extents.x == 5);
}

TEST_CASE("proxy box needs at least three points") {
  const std::vector<Point3> two = {{0, 0, 1}, {1, 1, 2}};
  CHECK(code_of([&] { build_proxy_box(two); }) == ErrorCode::DegenerateObject);
}

TEST_CASE("trimmed proxy covers at least 96% per axis and 88% jointly") {
  // Per-axis trimming at 2/98 keeps 96% on each axis; the joint bound is 1 - 3 * 4%.
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point3> pts(2000);
    for (auto& p : pts) p = {rng.normal() * 40, rng.uniform(-30, 30), 1500 + rng.normal() * 20};
    const ProxyBox b = build_proxy_box(pts);
    std::size_t inside = 0;
    std::size_t ax[3] = {0, 0, 0};
    for (const auto& p : pts) {
      const bool ix = std::fabs(p.x - b.center.x) <= b.half_extents.x + 1e-9;
      const bool iy = std::fabs(p.y - b.center.y) <= b.half_extents.y + 1e-9;
      const bool iz = std::fabs(p.z - b.center.z) <= b.half_extents.z + 1e-9;
      ax[0] += ix;
      ax[1] += iy;
      ax[2] += iz;
      inside += ix && iy && iz;
    }
    for (auto n : ax) CHECK(n >= 0.96 * pts.size() - 1);
    CHECK(inside >= 0.88 * pts.size());
  }
}

TEST_CASE("body length is the half diagonal") {
  const ProxyBox b{{0, 0, 1000}, {100, 50, 50}};
  CHECK(body_length(b) == doctest::Approx(std::sqrt(15000.0)));
}

TEST_CASE("box containment is closed and scales with inflation") {
  const ProxyBox b{{0, 0, 1000}, {100, 50, 50}};
  CHECK(b.contains({100, 0, 1000}));
  CHECK_FALSE(b.contains({100.001, 0, 1000}));
  CHECK(b.contains({110, 55, 1055}, 1.10));
  CHECK_FALSE(b.contains({110.01, 0, 1000}, 1.10));
}

TEST_CASE("occupancy skips excluded objects") {
  Scene s;
  s.objects.push_back(fixtures::proxy_object("a", {0, 0, 1000}, {50, 50, 50}));
  s.objects.push_back(fixtures::proxy_object("b", {300, 0, 1000}, {50, 50, 50}));
  const std::vector<std::string> none;
  const std::vector<std::string> ex_a = {"a"};
  CHECK(is_occupied({0, 0, 1000}, s, none));
  CHECK_FALSE(is_occupied({0, 0, 1000}, s, ex_a));
  CHECK(is_occupied({354, 0, 1000}, s, ex_a));
  CHECK_FALSE(is_occupied({356, 0, 1000}, s, ex_a));
  CHECK_FALSE(is_occupied({150, 0, 1000}, s, none));
}

TEST_CASE("lift_object back-projects masked pixel centers") {
  const CameraIntrinsics cam{100, 100, 2, 2, 4, 4};
  DepthMap d(4, 4, std::vector<std::uint32_t>(16, 1000));
  const Mask m = rect_mask(4, 4, 1, 1, 3, 3);
  const auto pts = lift_object(m, d, cam);
  REQUIRE(pts.size() == 4);
  CHECK(pts[0] == Point3{-5, -5, 1000});
  CHECK(pts[3] == Point3{5, 5, 1000});
}

TEST_CASE("lift_object requires depth on half the mask") {
  const CameraIntrinsics cam{100, 100, 2, 2, 4, 4};
  DepthMap d(4, 4, std::vector<std::uint32_t>(16, 1000));
  d.set(1, 1, 0);
  d.set(2, 1, 0);
  const Mask m = rect_mask(4, 4, 1, 1, 3, 3);
  CHECK(lift_object(m, d, cam).size() == 2);
  d.set(1, 2, 0);
  CHECK(code_of([&] { lift_object(m, d, cam); }) == ErrorCode::InsufficientDepth);
}

TEST_CASE("build_scene validates detections") {
  const CameraIntrinsics cam{100, 100, 5, 5, 10, 10};
  const DepthMap d(10, 10, std::vector<std::uint32_t>(100, 1500));
  const Mask m = rect_mask(10, 10, 2, 2, 6, 6);
  const BBox bb = m.bounding_box();
  CHECK(bb == BBox{2, 2, 6, 6});

  const Scene s = build_scene(cam, d, {{"a", "red box", bb, m}});
  REQUIRE(s.objects.size() == 1);
  CHECK(s.at("a").proxy.center.z == 1500);
  CHECK(code_of([&] { s.at("zz"); }) == ErrorCode::InvalidArgument);

  CHECK(code_of([&] { build_scene(cam, d, {{"a", "x", bb, m}, {"a", "y", bb, m}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { build_scene(cam, d, {{"a", "x", BBox{3, 3, 6, 6}, m}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { build_scene(cam, d, {{"a", "x", BBox{0, 0, 11, 6}, m}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { build_scene(cam, d, {{"a", "x", bb, Mask(10, 10)}}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { build_scene(cam, DepthMap(9, 10), {}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("RLE is column-major and starts with background") {
  Mask m(2, 2);
  m.set(0, 0);
  m.set(1, 1);
  const auto rle = encode_rle(m);
  CHECK(rle["size"] == nlohmann::json::array({2, 2}));
  // Column-major order: (0,0) (0,1) (1,0) (1,1) -> 1 0 0 1
  CHECK(rle["counts"] == nlohmann::json::array({0, 1, 2, 1}));
  CHECK(decode_rle(rle) == m);
}

TEST_CASE("RLE round trip on random masks") {
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const int w = static_cast<int>(rng.uniform_int(1, 30));
    const int h = static_cast<int>(rng.uniform_int(1, 30));
    Mask m(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) m.set(x, y, rng.bernoulli(0.3));
    }
    REQUIRE(decode_rle(encode_rle(m)) == m);
  }
}

TEST_CASE("RLE decoding rejects inconsistent counts") {
  CHECK_THROWS_AS(decode_rle(nlohmann::json{{"size", {2, 2}}, {"counts", {1, 1}}}), Error);
  CHECK_THROWS_AS(decode_rle(nlohmann::json{{"size", {2, 2}}, {"counts", {3, 3}}}), Error);
}

TEST_CASE("detections JSONL round trip") {
  fixtures::TempDir dir("det");
  const Mask m = rect_mask(8, 6, 1, 2, 4, 5);
  const std::vector<Detection> dets = {{"obj0", "red box", m.bounding_box(), m}};
  write_detections_jsonl(dir / "d.jsonl", dets);
  const auto back = read_detections_jsonl(dir / "d.jsonl");
  REQUIRE(back.size() == 1);
  CHECK(back[0].id == "obj0");
  CHECK(back[0].caption == "red box");
  CHECK(back[0].bbox == dets[0].bbox);
  CHECK(back[0].mask == m);
}

}
