#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "embloc/error.hpp"
#include "embloc/evalbench.hpp"
#include "embloc/rng.hpp"
#include "fixtures.hpp"

using namespace embloc;

namespace {

// grid_camera(): target (500, 500, Z) back-projects to (0, 0, Z).
Scene air_scene() {
  Scene s;
  s.cam = fixtures::grid_camera();
  s.objects.push_back(fixtures::proxy_object("a", {0, 0, 2000}, {50, 50, 50}));
  s.objects.push_back(fixtures::proxy_object("b", {0, 0, 1500}, {20, 20, 20}));
  s.objects.push_back(fixtures::proxy_object("c", {400, 0, 2000}, {50, 50, 50}));
  return s;
}

Query dir_query(const Scene& s, Family f, int code, std::optional<double> offset_mm = std::nullopt,
                const std::string& anchor = "a") {
  Query q;
  q.id = "q";
  q.family = f;
  q.instruction = "x";
  q.refs = {anchor};
  q.direction_code = code;
  q.gt.anchors = q.refs;
  q.gt.anchor_centers = {s.at(anchor).proxy.center};
  q.gt.direction_code = code;
  if (offset_mm) {
    q.offset = OffsetSpec::metric(*offset_mm);
    q.gt.offset = q.offset;
    q.gt.r_star_mm = *offset_mm;
  }
  return q;
}

Query between_query(const Scene& s, std::optional<double> offset_mm = std::nullopt) {
  Query q;
  q.id = "qb";
  q.family = offset_mm ? Family::BetweenOffset : Family::Between;
  q.instruction = "x";
  q.refs = {"a", "c"};
  q.gt.anchors = q.refs;
  q.gt.anchor_centers = {s.at("a").proxy.center, s.at("c").proxy.center};
  if (offset_mm) {
    q.offset = OffsetSpec::metric(*offset_mm);
    q.gt.offset = q.offset;
    q.gt.r_star_mm = *offset_mm;
  }
  return q;
}

constexpr int kFront = 5;
constexpr int kBehind = 4;

PointTarget axis_point(int z) { return {500, 500, z}; }

// 10 x 10 image: target (100x + 50, 100y + 50) lands on pixel (x, y).
PointTarget cell(int x, int y, int z) { return {100 * x + 50, 100 * y + 50, z}; }

EvalRecord air_record(Family f, std::size_t n, std::size_t passed, std::size_t within) {
  EvalRecord r;
  r.family = f;
  r.n = n;
  for (std::size_t i = 0; i < n; ++i) {
    PointEval p;
    p.dir_ok = i < passed;
    if (p.dir_ok && has_metric(f)) {
      p.metric_bias_mm = i < within ? 10.0 : 80.0;
      p.metric_ok = i < within;
    }
    r.points.push_back(p);
  }
  return r;
}

}  // namespace

TEST_SUITE("evalbench") {

TEST_CASE("Acc2D counts predictions inside the mask") {
  Mask m(10, 10);
  m.set(1, 1);
  m.set(2, 1);
  const DepthMap d(10, 10, std::vector<std::uint32_t>(100, 800));
  const EvalRecord r = eval_touchable({cell(1, 1, 800), cell(2, 1, 800), cell(5, 5, 800), cell(9, 9, 800)}, m, d);
  CHECK(r.n == 4);
  CHECK(r.acc2d() == 0.5);
  CHECK(r.mae_all() == 0.0);
}

TEST_CASE("MAE_Z partitions by mask membership") {
  Mask m(10, 10);
  m.set(0, 0);
  std::vector<std::uint32_t> v(100, 1000);
  v[0] = 500;
  const DepthMap d(10, 10, v);
  const EvalRecord r = eval_touchable({cell(0, 0, 520), cell(3, 3, 1100), cell(4, 4, 970)}, m, d);
  CHECK(r.mae_in() == 20.0);
  CHECK(r.mae_out() == 65.0);
  CHECK(r.mae_all() == doctest::Approx(50.0));
}

TEST_CASE("constant depth bias b gives MAE b") {
  Mask m(10, 10);
  m.set(2, 2);
  Rng rng(1);
  std::vector<std::uint32_t> v(100);
  for (auto& x : v) x = static_cast<std::uint32_t>(rng.uniform_int(300, 3000));
  const DepthMap d(10, 10, v);
  PointList pl;
  for (int x = 0; x < 10; ++x) pl.push_back(cell(x, x, static_cast<std::int32_t>(d.at(x, x)) + 50));
  const EvalRecord r = eval_touchable(pl, m, d);
  CHECK(r.mae_all() == 50.0);
  CHECK(r.mae_in() == 50.0);
  CHECK(r.mae_out() == 50.0);
}

TEST_CASE("reference-depth holes are excluded from MAE but not from Acc2D") {
  Mask m(10, 10);
  m.set(1, 1);
  DepthMap d(10, 10, std::vector<std::uint32_t>(100, 1000));
  d.set(1, 1, 0);
  const EvalRecord r = eval_touchable({cell(1, 1, 900), cell(2, 2, 1010)}, m, d);
  CHECK(r.acc2d() == 0.5);
  CHECK(r.mae_excluded == 1);
  CHECK_FALSE(r.mae_in().has_value());
  CHECK(r.mae_all() == 10.0);
}

TEST_CASE("empty touchable prediction scores zero with N = 1") {
  Mask m(10, 10);
  m.set(1, 1);
  const EvalRecord r = eval_touchable({}, m, DepthMap(10, 10));
  CHECK(r.status == ResponseStatus::Empty);
  CHECK(r.n == 1);
  CHECK(r.acc2d() == 0.0);
}

TEST_CASE("direction with offset: exact, 70 mm long and wrong side") {
  const Scene s = air_scene();
  const Query q = dir_query(s, Family::DirOffset, kFront, 300.0);
  const EvalRecord r = eval_air({axis_point(1700), axis_point(1630), axis_point(2300)}, q, s, {});
  REQUIRE(r.points.size() == 3);
  CHECK(r.points[0].dir_ok);
  CHECK(r.points[0].metric_bias_mm == 0.0);
  CHECK(r.points[0].metric_ok == true);
  CHECK(r.points[1].dir_ok);
  CHECK(r.points[1].metric_bias_mm == 70.0);
  CHECK(r.points[1].metric_ok == false);
  CHECK_FALSE(r.points[2].dir_ok);
  CHECK(r.points[2].relation_ok == false);
  CHECK_FALSE(r.points[2].metric_bias_mm.has_value());
  CHECK_FALSE(r.points[2].occupancy_ok.has_value());

  const EvalReport rep = aggregate(std::vector<EvalRecord>{r});
  CHECK(rep.overall.dir_pt.num == 2);
  CHECK(rep.overall.met_pt.num == 1);
  CHECK(rep.overall.met_pt.den == 2);
  CHECK(rep.overall.full_pt.den == 3);
  CHECK(*rep.overall.mean_err_cm.value() == doctest::Approx(3.5));
}

TEST_CASE("metric tolerance is inclusive at 50 mm") {
  const Scene s = air_scene();
  const Query q = dir_query(s, Family::DirOffset, kFront, 300.0);
  const EvalRecord r = eval_air({axis_point(1650), axis_point(1649)}, q, s, {});
  CHECK(r.points[0].metric_ok == true);
  CHECK(r.points[1].metric_ok == false);
}

TEST_CASE("occupancy rejects relation-passing points inside a distractor but not the anchor") {
  const Scene s = air_scene();
  const Query q = dir_query(s, Family::DirOnly, kFront);
  const EvalRecord r = eval_air({axis_point(1500), axis_point(1950), axis_point(1200)}, q, s, {});
  CHECK(r.points[0].relation_ok == true);
  CHECK(r.points[0].occupancy_ok == false);
  CHECK_FALSE(r.points[0].dir_ok);
  CHECK(r.points[1].dir_ok);
  CHECK(r.points[2].dir_ok);

  RelationParams off;
  off.occupancy_check = false;
  CHECK(eval_air({axis_point(1500)}, q, s, off).points[0].dir_ok);
}

TEST_CASE("occupancy verdict does not depend on scene object order") {
  Scene s = air_scene();
  const Query q = dir_query(s, Family::DirOnly, kFront);
  PointList pl;
  for (int z = 1100; z < 2000; z += 7) pl.push_back(axis_point(z));
  const EvalRecord a = eval_air(pl, q, s, {});
  std::reverse(s.objects.begin(), s.objects.end());
  const EvalRecord b = eval_air(pl, q, s, {});
  std::rotate(s.objects.begin(), s.objects.begin() + 1, s.objects.end());
  const EvalRecord c = eval_air(pl, q, s, {});
  for (std::size_t i = 0; i < pl.size(); ++i) {
    REQUIRE(a.points[i].dir_ok == b.points[i].dir_ok);
    REQUIRE(a.points[i].dir_ok == c.points[i].dir_ok);
  }
}

TEST_CASE("Z = 0 marks the point failed, not the query") {
  const Scene s = air_scene();
  const Query q = dir_query(s, Family::DirOnly, kBehind);
  const EvalRecord r = eval_air({{500, 500, 0}, axis_point(2300)}, q, s, {});
  CHECK(r.status == ResponseStatus::Ok);
  CHECK_FALSE(r.points[0].dir_ok);
  CHECK_FALSE(r.points[0].back_projected);
  CHECK(r.points[1].dir_ok);
}

TEST_CASE("between and between-offset use the corridor and the first anchor's distance") {
  const Scene s = air_scene();
  // Segment a -> c runs along +X at Z = 2000; u = 600 at Z = 2000 gives X = 200.
  const EvalRecord r = eval_air({{600, 500, 2000}, {520, 500, 2000}, {515, 500, 2000}, {600, 500, 1850}},
                                 between_query(s), s, {});
  CHECK(r.points[0].dir_ok);
  CHECK(r.points[1].dir_ok);        // t = 0.1, inside a's inflated box but a is referenced
  CHECK_FALSE(r.points[2].dir_ok);  // t = 0.075
  CHECK_FALSE(r.points[3].dir_ok);  // 150 mm off the segment

  const EvalRecord ro = eval_air({{600, 500, 2000}}, between_query(s, 200.0), s, {});
  CHECK(ro.points[0].metric_bias_mm == 0.0);
}

TEST_CASE("anchor mismatch between dataset and scene is a format error") {
  const Scene s = air_scene();
  Query q = dir_query(s, Family::DirOnly, kFront);
  q.gt.anchor_centers[0].x += 1;
  try {
    eval_air({axis_point(1700)}, q, s, {});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Format);
  }
}

TEST_CASE("unparseable responses count as one wrong point") {
  const Scene s = air_scene();
  const Query q = dir_query(s, Family::DirOffset, kFront, 300.0);
  const EvalRecord bad = eval_response("I cannot answer", q, s, {});
  CHECK(bad.status == ResponseStatus::ParseFailure);
  CHECK(bad.n == 1);
  const EvalRecord range = eval_response("[(1000, 1, 1)]", q, s, {});
  CHECK(range.status == ResponseStatus::RangeViolation);
  const EvalRecord empty = eval_response("[]", q, s, {});
  CHECK(empty.status == ResponseStatus::Empty);
  const EvalRecord good = eval_response("[(500, 500, 1700)]", q, s, {});
  const EvalReport rep = aggregate(std::vector<EvalRecord>{bad, range, empty, good});
  CHECK(rep.overall.dir_pt.num == 1);
  CHECK(rep.overall.dir_pt.den == 4);
  CHECK(rep.overall.full_pt.den == 4);
  CHECK(rep.overall.met_pt.den == 1);
  CHECK(rep.status_counts.at(ResponseStatus::ParseFailure) == 1);
}

TEST_CASE("denominators follow the metric-conditional rules") {
  // 10 offset points, 5 dir-passed, 2 of those within tolerance.
  const std::vector<EvalRecord> recs = {air_record(Family::DirOffset, 4, 3, 1),
                                        air_record(Family::BodyLength, 3, 2, 1),
                                        air_record(Family::BetweenOffset, 3, 0, 0)};
  const EvalReport rep = aggregate(recs);
  CHECK(*rep.overall.dir_pt.value() == 0.5);
  CHECK(*rep.overall.met_pt.value() == 0.4);
  CHECK(*rep.overall.full_pt.value() == 0.2);
  CHECK(rep.overall.full_pt.den == 10);
}

TEST_CASE("micro and per-query macro DirPt differ on imbalanced point counts") {
  const std::vector<EvalRecord> recs = {air_record(Family::DirOnly, 4, 3, 0), air_record(Family::DirOnly, 1, 0, 0),
                                        air_record(Family::DirOnly, 5, 5, 0)};
  const EvalReport rep = aggregate(recs);
  CHECK(*rep.overall.dir_pt.value() == 0.8);
  CHECK(*rep.overall.dir_pt_query_macro.value() == doctest::Approx((0.75 + 0 + 1) / 3));
}

TEST_CASE("zero denominators are absent, not zero") {
  const EvalReport rep = aggregate(std::vector<EvalRecord>{air_record(Family::DirOnly, 2, 0, 0)});
  CHECK(rep.overall.dir_pt.value() == 0.0);
  CHECK_FALSE(rep.overall.met_pt.value().has_value());
  CHECK_FALSE(rep.overall.full_pt.value().has_value());
  CHECK_FALSE(rep.overall.mean_err_cm.value().has_value());
  CHECK_FALSE(rep.overall.acc2d.value().has_value());
  const auto j = to_json(rep);
  CHECK(j["overall"]["met_pt"]["value"].is_null());
  CHECK(j["overall"]["met_pt"]["den"] == 0);
}

TEST_CASE("aggregating nothing is an error") {
  CHECK_THROWS_AS(aggregate(std::vector<EvalRecord>{}), Error);
}

TEST_CASE("conditionality: depth of direction-failed points cannot move metric rates") {
  const Scene s = air_scene();
  const Query q = dir_query(s, Family::DirOffset, kFront, 300.0);
  Rng rng(3);
  const EvalReport base = aggregate(std::vector<EvalRecord>{eval_air({axis_point(1700), axis_point(2300)}, q, s, {})});
  for (int i = 0; i < 50; ++i) {
    const auto z = static_cast<std::int32_t>(rng.uniform_int(2051, 9000));
    const EvalReport r = aggregate(std::vector<EvalRecord>{eval_air({axis_point(1700), axis_point(z)}, q, s, {})});
    REQUIRE(r.overall.met_pt.num == base.overall.met_pt.num);
    REQUIRE(r.overall.met_pt.den == base.overall.met_pt.den);
    REQUIRE(r.overall.full_pt.num == base.overall.full_pt.num);
    REQUIRE(r.overall.mean_err_cm.sum == base.overall.mean_err_cm.sum);
  }
}

TEST_CASE("monotonicity: tightening the cone or corridor never raises DirPt") {
  const Scene s = air_scene();
  Rng rng(8);
  PointList pl;
  for (int i = 0; i < 400; ++i) {
    pl.push_back({static_cast<int>(rng.uniform_int(300, 700)), static_cast<int>(rng.uniform_int(300, 700)),
                  static_cast<std::int32_t>(rng.uniform_int(1500, 2500))});
  }
  std::size_t prev_cone = SIZE_MAX;
  std::size_t prev_corr = SIZE_MAX;
  for (double k : {1.0, 0.8, 0.6, 0.4, 0.2}) {
    RelationParams p;
    p.cone_half_angle_deg = 45 * k;
    p.corridor_radius_mm = 200 * k;
    std::size_t cone = 0;
    std::size_t corr = 0;
    for (int code = 0; code < kDirectionCount; ++code) cone += eval_air(pl, dir_query(s, Family::DirOnly, code), s, p).dir_passed();
    corr = eval_air(pl, between_query(s), s, p).dir_passed();
    CHECK(cone <= prev_cone);
    CHECK(corr <= prev_corr);
    prev_cone = cone;
    prev_corr = corr;
  }
}

TEST_CASE("FullPt obeys the denominator algebra") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvalRecord> recs;
    for (int i = 0; i < 5; ++i) {
      const auto n = static_cast<std::size_t>(rng.uniform_int(1, 6));
      const auto passed = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n)));
      const auto within = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(passed)));
      recs.push_back(air_record(i % 2 ? Family::DirOffset : Family::DirOnly, n, passed, within));
    }
    const EvalReport rep = aggregate(recs);
    const MetricSummary& off = rep.by_family.at(Family::DirOffset);
    const double full = *off.full_pt.value();
    const double dir_off = *off.dir_pt.value();
    const double met = off.met_pt.value().value_or(0);
    REQUIRE(full <= dir_off + 1e-12);
    REQUIRE(full <= met * dir_off + 1e-12);
  }
}

TEST_CASE("report JSON round trip and table rendering") {
  const std::vector<EvalRecord> recs = {air_record(Family::DirOffset, 4, 3, 1), air_record(Family::Between, 2, 1, 0)};
  EvalRecord touch;
  touch.family = Family::Touchable;
  touch.n = 2;
  PointEval pe;
  pe.in_mask = true;
  pe.depth_error_mm = 12;
  touch.points = {pe, pe};
  std::vector<EvalRecord> all = recs;
  all.push_back(touch);
  const EvalReport rep = aggregate(all);
  const EvalReport back = report_from_json(nlohmann::json::parse(to_json(rep).dump()));
  CHECK(to_json(back).dump() == to_json(rep).dump());
  const std::string table = render_report_table(rep);
  CHECK(table.find("MetPt@5cm") != std::string::npos);
  CHECK(table.find("0.6667 (4/6)") != std::string::npos);
  CHECK(table.find("Acc2D") != std::string::npos);
  CHECK(table.find("between") != std::string::npos);
}

}
