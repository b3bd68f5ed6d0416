#include <bit>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "embloc/rng.hpp"
#include "embloc/simd/kernels.hpp"

using namespace embloc;
using simd::KernelTable;

namespace {

std::vector<const KernelTable*> vector_tables() {
  std::vector<const KernelTable*> out;
  if (const KernelTable* t = simd::avx2_kernels()) out.push_back(t);
  return out;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

struct Cloud {
  std::vector<double> x, y, z;
};

// Integer lattice points around the origin hit the predicates' boundaries exactly.
Cloud lattice_cloud(Rng& rng, std::size_t n) {
  Cloud c;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 2 == 0) {
      c.x.push_back(static_cast<double>(rng.uniform_int(-12, 12)));
      c.y.push_back(static_cast<double>(rng.uniform_int(-12, 12)));
      c.z.push_back(static_cast<double>(rng.uniform_int(-12, 12)));
    } else {
      c.x.push_back(rng.uniform(-15, 15));
      c.y.push_back(rng.uniform(-15, 15));
      c.z.push_back(rng.uniform(-15, 15));
    }
  }
  return c;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("dispatch") {
  CHECK(simd::scalar_kernels().name == "scalar");
  const KernelTable& active = simd::active_kernels();
  CHECK((&active == &simd::scalar_kernels() || &active == simd::avx2_kernels()));
  MESSAGE("active kernels: " << active.name);
}

TEST_CASE("vector kernels match the scalar reference bit for bit") {
  const KernelTable& ref = simd::scalar_kernels();
  const auto tables = vector_tables();
  if (tables.empty()) MESSAGE("no vector kernels on this machine; only the scalar table is exercised");
  Rng rng(99);
  for (const KernelTable* k : tables) {
    CAPTURE(k->name);
    for (std::size_t n = 0; n < 70; ++n) {
      std::vector<std::uint32_t> depth(n);
      for (auto& d : depth) d = static_cast<std::uint32_t>(rng.uniform_int(0, (1 << 24) - 1));
      std::vector<std::uint8_t> a(3 * n + 8, 0xAA), b(3 * n + 8, 0xAA);
      REQUIRE(ref.pack_depth24(depth.data(), n, a.data()) == k->pack_depth24(depth.data(), n, b.data()));
      REQUIRE(a == b);

      std::vector<std::uint32_t> ua(n + 1, 7), ub(n + 1, 7);
      ref.unpack_depth24(a.data(), n, ua.data());
      k->unpack_depth24(a.data(), n, ub.data());
      REQUIRE(ua == ub);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(ua[i] == depth[i]);

      if (n > 0) {
        depth[rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)] = 1u << 24;
        CHECK_FALSE(ref.pack_depth24(depth.data(), n, a.data()));
        CHECK_FALSE(k->pack_depth24(depth.data(), n, b.data()));
      }

      const simd::PinholeArgs cam{525.5, 519.25, 319.75, 241.5};
      std::vector<double> xs(n), ys(n), zs(n);
      for (std::size_t i = 0; i < n; ++i) {
        xs[i] = rng.uniform(0, 640);
        ys[i] = rng.uniform(0, 480);
        zs[i] = static_cast<double>(rng.uniform_int(1, 10000));
      }
      std::vector<double> oxa(n), oya(n), oxb(n), oyb(n);
      ref.back_project(xs.data(), ys.data(), zs.data(), n, cam, oxa.data(), oya.data());
      k->back_project(xs.data(), ys.data(), zs.data(), n, cam, oxb.data(), oyb.data());
      REQUIRE(same_bits(oxa, oxb));
      REQUIRE(same_bits(oya, oyb));

      const Cloud c = lattice_cloud(rng, n);
      std::vector<std::uint8_t> ma(n + 1, 9), mb(n + 1, 9);
      const double apex[3] = {0, 0, 0};
      const double axes[4][3] = {{1, 0, 0}, {1, -1, 0}, {-1, 1, 1}, {0, 0, -1}};
      for (const auto& axis : axes) {
        ref.cone_mask(c.x.data(), c.y.data(), c.z.data(), n, apex, axis, 0.75, ma.data());
        k->cone_mask(c.x.data(), c.y.data(), c.z.data(), n, apex, axis, 0.75, mb.data());
        REQUIRE(ma == mb);
      }
      const double a3[3] = {-10, 0, 0};
      const double b3[3] = {10, 0, 0};
      ref.corridor_mask(c.x.data(), c.y.data(), c.z.data(), n, a3, b3, 0.1, 0.9, 5, ma.data());
      k->corridor_mask(c.x.data(), c.y.data(), c.z.data(), n, a3, b3, 0.1, 0.9, 5, mb.data());
      REQUIRE(ma == mb);
      const double center[3] = {0, 0, 0};
      const double half[3] = {10, 5, 5};
      ref.box_mask(c.x.data(), c.y.data(), c.z.data(), n, center, half, 1.1, ma.data());
      k->box_mask(c.x.data(), c.y.data(), c.z.data(), n, center, half, 1.1, mb.data());
      REQUIRE(ma == mb);
    }
  }
}

TEST_CASE("scalar kernels: packed layout and predicate spot checks") {
  const KernelTable& k = simd::scalar_kernels();
  const std::uint32_t d[2] = {0x123456, 1432};
  std::uint8_t rgb[6];
  REQUIRE(k.pack_depth24(d, 2, rgb));
  CHECK(rgb[0] == 0x12);
  CHECK(rgb[1] == 0x34);
  CHECK(rgb[2] == 0x56);
  CHECK(rgb[4] == 5);
  CHECK(rgb[5] == 152);

  const double x[3] = {5, -5, 0};
  const double y[3] = {0, 0, 0};
  const double z[3] = {0, 0, 0};
  const double apex[3] = {0, 0, 0};
  const double axis[3] = {1, 0, 0};
  std::uint8_t out[3];
  k.cone_mask(x, y, z, 3, apex, axis, 0.75, out);
  CHECK(out[0] == 1);
  CHECK(out[1] == 0);
  CHECK(out[2] == 0);
}

}
