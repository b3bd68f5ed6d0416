#include "embloc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "embloc/depth_io.hpp"
#include "embloc/error.hpp"
#include "embloc/evalbench.hpp"
#include "embloc/outparse.hpp"
#include "embloc/rng.hpp"

namespace embloc {

LiftResult lift_touchable(std::span<const PixelIndex> annotation, const DepthMap& depth,
                          const CameraIntrinsics& cam) {
  if (depth.width() != cam.width || depth.height() != cam.height) {
    throw Error(ErrorCode::InvalidArgument, "depth map size does not match intrinsics");
  }
  LiftResult out;
  for (const auto& px : annotation) {
    if (px.x < 0 || px.y < 0 || px.x >= cam.width || px.y >= cam.height) {
      throw Error(ErrorCode::OutOfImage,
                  "annotation (" + std::to_string(px.x) + ", " + std::to_string(px.y) + ") outside image");
    }
    const std::uint32_t z = depth.at(px.x, px.y);
    if (z == 0) {
      ++out.dropped;
      out.reasons.push_back("depth hole at (" + std::to_string(px.x) + ", " + std::to_string(px.y) + ")");
      continue;
    }
    const NormalizedCoord n = pixel_to_normalized(px.x + 0.5, px.y + 0.5, cam);
    out.targets.push_back({n.u, n.v, static_cast<std::int32_t>(z)});
  }
  if (out.targets.empty()) {
    throw Error(ErrorCode::EmptyLift, "all " + std::to_string(annotation.size()) + " annotation points on depth holes");
  }
  return out;
}

void GenOptions::validate() const {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidArgument, "gen options: " + why); };
  if (max_attempts < 1) bad("max_attempts must be >= 1");
  if (!(metric_offset_min_mm >= 0 && metric_offset_min_mm <= metric_offset_max_mm)) bad("metric offset range");
  if (std::ceil(metric_offset_min_mm / 10) > std::floor(metric_offset_max_mm / 10)) {
    bad("metric offset range holds no whole centimetre");
  }
  if (body_length_min < 1 || body_length_min > body_length_max) bad("body length range");
  if (!(dir_radius_min_mm > 0 && dir_radius_min_mm <= dir_radius_max_mm)) bad("dir radius range");
  if (!(corridor_t_margin >= 0 && corridor_t_margin < 0.5)) bad("corridor_t_margin");
  if (!(corridor_perp_fraction >= 0 && corridor_perp_fraction <= 1)) bad("corridor_perp_fraction");
  if (!(offset_slack_mm >= 0)) bad("offset_slack_mm");
  if (touch_points_min < 1 || touch_points_min > touch_points_max) bad("touch point range");
}

nlohmann::ordered_json to_json(const GenOptions& o) {
  nlohmann::ordered_json j;
  j["max_attempts"] = o.max_attempts;
  j["metric_offset_mm"] = {o.metric_offset_min_mm, o.metric_offset_max_mm};
  j["body_lengths"] = {o.body_length_min, o.body_length_max};
  j["dir_radius_mm"] = {o.dir_radius_min_mm, o.dir_radius_max_mm};
  j["corridor_t_margin"] = o.corridor_t_margin;
  j["corridor_perp_fraction"] = o.corridor_perp_fraction;
  j["offset_slack_mm"] = o.offset_slack_mm;
  j["touch_points"] = {o.touch_points_min, o.touch_points_max};
  return j;
}

GenOptions gen_options_from_json(const nlohmann::json& j) {
  GenOptions o;
  try {
    if (j.contains("max_attempts")) o.max_attempts = j["max_attempts"].get<int>();
    if (j.contains("metric_offset_mm")) {
      o.metric_offset_min_mm = j["metric_offset_mm"].at(0).get<double>();
      o.metric_offset_max_mm = j["metric_offset_mm"].at(1).get<double>();
    }
    if (j.contains("body_lengths")) {
      o.body_length_min = j["body_lengths"].at(0).get<int>();
      o.body_length_max = j["body_lengths"].at(1).get<int>();
    }
    if (j.contains("dir_radius_mm")) {
      o.dir_radius_min_mm = j["dir_radius_mm"].at(0).get<double>();
      o.dir_radius_max_mm = j["dir_radius_mm"].at(1).get<double>();
    }
    if (j.contains("corridor_t_margin")) o.corridor_t_margin = j["corridor_t_margin"].get<double>();
    if (j.contains("corridor_perp_fraction")) o.corridor_perp_fraction = j["corridor_perp_fraction"].get<double>();
    if (j.contains("offset_slack_mm")) o.offset_slack_mm = j["offset_slack_mm"].get<double>();
    if (j.contains("touch_points")) {
      o.touch_points_min = j["touch_points"].at(0).get<int>();
      o.touch_points_max = j["touch_points"].at(1).get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("gen options: ") + e.what());
  }
  o.validate();
  return o;
}

namespace {

std::string fill(std::string_view tmpl, std::initializer_list<std::pair<std::string_view, std::string>> slots) {
  std::string out(tmpl);
  for (const auto& [key, value] : slots) {
    const std::string token = "{" + std::string(key) + "}";
    for (std::size_t pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos + value.size())) {
      out.replace(pos, token.size(), value);
    }
  }
  return out;
}

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& options) {
  return options[static_cast<std::size_t>(rng.uniform_int(0, N - 1))];
}

constexpr std::array<std::string_view, 3> kTouchTemplates = {
    "Point to a spot on the {A} that you could touch.",
    "Where would you touch the {A}? Give the 3D point.",
    "Pick a graspable point on the {A}.",
};
constexpr std::array<std::string_view, 2> kDirOnlyTemplates = {
    "Point to a free-space location {dir} the {A}.",
    "Give a point in the air {dir} the {A}.",
};
constexpr std::array<std::string_view, 2> kDirOffsetTemplates = {
    "Point to the spot {m} cm {dir} the {A}.",
    "Give a point in the air {m} cm {dir} the {A}.",
};
constexpr std::array<std::string_view, 2> kBodyLengthTemplates = {
    "Point to the spot {k} {unit} {dir} the {A}.",
    "Give a point in the air {k} of the {A}'s {unit} {dir} it.",
};
constexpr std::array<std::string_view, 2> kBetweenTemplates = {
    "Point to a free-space location between the {A} and the {B}.",
    "Give a point in the air between the {A} and the {B}.",
};
constexpr std::array<std::string_view, 2> kBetweenOffsetTemplates = {
    "Point to the spot between the {A} and the {B}, {m} cm from the {A}.",
    "Give a point between the {A} and the {B} that is {m} cm away from the {A}.",
};

Point3 random_unit_perpendicular(Rng& rng, const Point3& axis) {
  const Point3 a = (1.0 / norm(axis)) * axis;
  for (;;) {
    const Point3 r{rng.normal(), rng.normal(), rng.normal()};
    const Point3 perp = r - dot(r, a) * a;
    const double len = norm(perp);
    if (len > 1e-6) return (1.0 / len) * perp;
  }
}

int sample_cm(Rng& rng, double lo_mm, double hi_mm) {
  const auto lo = static_cast<std::int64_t>(std::ceil(lo_mm / 10));
  const auto hi = static_cast<std::int64_t>(std::floor(hi_mm / 10));
  return static_cast<int>(rng.uniform_int(lo, hi));
}

/// Smallest-step adjustment of k so that k * unit reproduces target exactly.
bool exact_multiplier(double target, double unit, double& k) {
  k = target / unit;
  for (int i = 0; i < 16; ++i) {
    const double v = k * unit;
    if (v == target) return true;
    k = std::nextafter(k, v < target ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity());
  }
  return false;
}

Query blank_query(const QueryContext& ctx, Family family) {
  Query q;
  q.id = ctx.id;
  q.family = family;
  q.image = ctx.image;
  q.depth = ctx.depth;
  q.intrinsics = ctx.intrinsics;
  q.detections = ctx.detections;
  return q;
}

bool witness_passes(const PointTarget& t, const Query& q, const Scene& scene, const RelationParams& params) {
  const EvalRecord r = eval_air({t}, q, scene, params);
  const PointEval& pe = r.points.at(0);
  if (!pe.dir_ok) return false;
  if (has_metric(q.family)) return pe.metric_bias_mm && *pe.metric_bias_mm == 0.0;
  return true;
}

}  // namespace

Query synthesize_air_query(const Scene& scene, Family family, std::uint64_t seed, const RelationParams& params,
                           const GenOptions& opts, const QueryContext& ctx) {
  if (!is_air(family)) throw Error(ErrorCode::InvalidArgument, "synthesize_air_query needs an air family");
  params.validate();
  opts.validate();
  const bool between = is_between(family);
  const std::size_t need = between ? 2 : 1;
  if (scene.objects.size() < need) {
    throw Error(ErrorCode::Unsatisfiable, std::string(to_string(family)) + " needs " + std::to_string(need) +
                                              " objects, scene has " + std::to_string(scene.objects.size()));
  }
  Rng rng(seed);
  const auto nobj = static_cast<std::int64_t>(scene.objects.size());

  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    const SceneObject& a = scene.objects[static_cast<std::size_t>(rng.uniform_int(0, nobj - 1))];
    const SceneObject* b = nullptr;
    if (between) {
      auto j = rng.uniform_int(0, nobj - 2);
      if (&scene.objects[static_cast<std::size_t>(j)] == &a) j = nobj - 1;
      b = &scene.objects[static_cast<std::size_t>(j)];
    }
    const Point3 c = a.proxy.center;

    Query q = blank_query(ctx, family);
    q.refs.push_back(a.id);
    if (b) q.refs.push_back(b->id);

    Point3 p;
    double nominal_r = 0;
    int cm = 0;
    int count = 0;
    const Direction26* dir = nullptr;
    if (!between) {
      dir = &direction_from_code(static_cast<int>(rng.uniform_int(0, kDirectionCount - 1)));
      q.direction_code = dir->code;
    }
    switch (family) {
      case Family::DirOnly:
        nominal_r = rng.uniform(opts.dir_radius_min_mm, opts.dir_radius_max_mm);
        p = c + nominal_r * dir->unit;
        break;
      case Family::DirOffset:
        cm = sample_cm(rng, opts.metric_offset_min_mm, opts.metric_offset_max_mm);
        nominal_r = 10.0 * cm;
        q.offset = OffsetSpec::metric(nominal_r);
        p = c + nominal_r * dir->unit;
        break;
      case Family::BodyLength:
        count = static_cast<int>(rng.uniform_int(opts.body_length_min, opts.body_length_max));
        nominal_r = count * body_length(a.proxy);
        q.offset = OffsetSpec::body_lengths(count);
        p = c + nominal_r * dir->unit;
        break;
      case Family::Between:
      case Family::BetweenOffset: {
        const Point3 s = b->proxy.center - c;
        const double len = norm(s);
        if (!(len > 0)) continue;
        const double lo = params.corridor_lo + opts.corridor_t_margin;
        const double hi = params.corridor_hi - opts.corridor_t_margin;
        const Point3 perp = random_unit_perpendicular(rng, s);
        double e = rng.uniform(0, opts.corridor_perp_fraction * params.corridor_radius_mm);
        double t = 0;
        if (family == Family::Between) {
          t = rng.uniform(lo, hi);
        } else {
          const double mlo = std::max(opts.metric_offset_min_mm, lo * len);
          const double mhi = std::min(opts.metric_offset_max_mm, hi * len);
          if (std::ceil(mlo / 10) > std::floor(mhi / 10)) continue;
          cm = sample_cm(rng, mlo, mhi);
          nominal_r = 10.0 * cm;
          q.offset = OffsetSpec::metric(nominal_r);
          e = std::min(e, 0.5 * nominal_r);
          t = std::sqrt(nominal_r * nominal_r - e * e) / len;
        }
        p = c + t * s + e * perp;
        break;
      }
      case Family::Touchable:
        break;
    }

    PointTarget target;
    try {
      target = project(p, scene.cam);
    } catch (const Error&) {
      continue;
    }
    if (target.z <= 0) continue;
    const Point3 realized = back_project(target, scene.cam);
    const double d = distance(realized, c);

    q.gt.anchors = q.refs;
    q.gt.anchor_centers.push_back(c);
    if (b) q.gt.anchor_centers.push_back(b->proxy.center);
    q.gt.direction_code = q.direction_code;
    if (has_metric(family)) {
      if (std::fabs(d - nominal_r) > opts.offset_slack_mm) continue;
      if (family == Family::BodyLength) {
        const double bl = body_length(a.proxy);
        double k = 0;
        if (!exact_multiplier(d, bl, k)) continue;
        q.gt.offset = OffsetSpec::body_lengths(k);
        q.gt.r_star_mm = k * bl;
      } else {
        q.gt.offset = OffsetSpec::metric(d);
        q.gt.r_star_mm = d;
      }
    }
    q.answer_text = serialize_points({target});

    const std::string A = a.caption;
    switch (family) {
      case Family::DirOnly:
        q.instruction = fill(pick(rng, kDirOnlyTemplates), {{"dir", direction_phrase(*dir)}, {"A", A}});
        break;
      case Family::DirOffset:
        q.instruction = fill(pick(rng, kDirOffsetTemplates),
                             {{"m", std::to_string(cm)}, {"dir", direction_phrase(*dir)}, {"A", A}});
        break;
      case Family::BodyLength: {
        static constexpr std::array<std::string_view, 4> kWords = {"zero", "one", "two", "three"};
        const std::string k = count < 4 ? std::string(kWords[static_cast<std::size_t>(count)]) : std::to_string(count);
        q.instruction = fill(pick(rng, kBodyLengthTemplates), {{"k", k},
                                                               {"unit", count == 1 ? "body length" : "body lengths"},
                                                               {"dir", direction_phrase(*dir)},
                                                               {"A", A}});
        break;
      }
      case Family::Between:
        q.instruction = fill(pick(rng, kBetweenTemplates), {{"A", A}, {"B", b->caption}});
        break;
      case Family::BetweenOffset:
        q.instruction =
            fill(pick(rng, kBetweenOffsetTemplates), {{"A", A}, {"B", b->caption}, {"m", std::to_string(cm)}});
        break;
      case Family::Touchable:
        break;
    }

    if (!witness_passes(target, q, scene, params)) continue;
    q.validate();
    return q;
  }
  throw Error(ErrorCode::Unsatisfiable, std::string(to_string(family)) + ": no verified witness after " +
                                            std::to_string(opts.max_attempts) + " attempts");
}

Query synthesize_touchable_query(const Scene& scene, std::uint64_t seed, const GenOptions& opts,
                                 const QueryContext& ctx) {
  opts.validate();
  if (scene.objects.empty()) throw Error(ErrorCode::Unsatisfiable, "touchable: scene has no objects");
  Rng rng(seed);
  const auto nobj = static_cast<std::int64_t>(scene.objects.size());
  for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
    const SceneObject& o = scene.objects[static_cast<std::size_t>(rng.uniform_int(0, nobj - 1))];
    std::vector<PixelIndex> pixels;
    for (int y = 0; y < o.mask.height(); ++y) {
      for (int x = 0; x < o.mask.width(); ++x) {
        if (o.mask.at(x, y)) pixels.push_back({x, y});
      }
    }
    if (pixels.empty()) continue;
    const auto k = std::min<std::size_t>(pixels.size(),
                                         static_cast<std::size_t>(rng.uniform_int(opts.touch_points_min, opts.touch_points_max)));
    std::vector<PixelIndex> annotation;
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(i),
                                                              static_cast<std::int64_t>(pixels.size() - 1)));
      std::swap(pixels[i], pixels[j]);
      annotation.push_back(pixels[i]);
    }
    LiftResult lifted;
    try {
      lifted = lift_touchable(annotation, scene.depth, scene.cam);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyLift) continue;
      throw;
    }

    Query q = blank_query(ctx, Family::Touchable);
    q.refs = {o.id};
    q.gt.mask_object = o.id;
    q.answer_text = serialize_points(lifted.targets);
    q.instruction = fill(pick(rng, kTouchTemplates), {{"A", o.caption}});

    const EvalRecord r = eval_touchable(lifted.targets, o.mask, scene.depth);
    if (r.in_mask_count() != r.n || r.mae_all().value_or(1) != 0.0) continue;
    q.validate();
    return q;
  }
  throw Error(ErrorCode::Unsatisfiable,
              "touchable: no liftable annotation after " + std::to_string(opts.max_attempts) + " attempts");
}

Query synthesize_query(const Scene& scene, Family family, std::uint64_t seed, const RelationParams& params,
                       const GenOptions& opts, const QueryContext& ctx) {
  if (family == Family::Touchable) return synthesize_touchable_query(scene, seed, opts, ctx);
  return synthesize_air_query(scene, family, seed, params, opts, ctx);
}

FamilyCounts plan_mix(std::size_t total, const FamilyMix& ratios) {
  if (ratios.empty()) throw Error(ErrorCode::BadMix, "empty mix");
  long double sum = 0;
  for (const auto& [f, r] : ratios) {
    if (!std::isfinite(r) || r < 0) {
      throw Error(ErrorCode::BadMix, "ratio for " + std::string(to_string(f)) + " must be finite and non-negative");
    }
    sum += r;
  }
  if (std::fabs(static_cast<double>(sum) - 1.0) > 1e-6) {
    throw Error(ErrorCode::BadMix, "ratios sum to " + std::to_string(static_cast<double>(sum)) + ", expected 1");
  }
  FamilyCounts counts;
  std::vector<std::pair<long double, Family>> remainders;
  std::size_t assigned = 0;
  for (const auto& [f, r] : ratios) {
    const long double quota = static_cast<long double>(total) * r / sum;
    const auto whole = static_cast<std::size_t>(std::floor(quota));
    counts[f] = whole;
    assigned += whole;
    remainders.emplace_back(quota - static_cast<long double>(whole), f);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t i = 0; assigned < total; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];
  return counts;
}

FamilyMix table1_mix() {
  return {{Family::DirOnly, 0.3518},
          {Family::DirOffset, 0.3366},
          {Family::BodyLength, 0.1933},
          {Family::Between, 0.0376},
          {Family::BetweenOffset, 0.0807}};
}

FamilyMix uniform_mix() {
  FamilyMix m;
  for (Family f : kAllFamilies) m[f] = 1.0 / static_cast<double>(kAllFamilies.size());
  return m;
}

FamilyMix mix_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadMix, "mix must be a JSON object of family -> ratio");
  FamilyMix m;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw Error(ErrorCode::BadMix, "ratio for '" + k + "' is not a number");
    Family f;
    try {
      f = family_from_string(k);
    } catch (const Error& e) {
      throw Error(ErrorCode::BadMix, e.detail());
    }
    m[f] = v.get<double>();
  }
  plan_mix(0, m);
  return m;
}

nlohmann::ordered_json to_json(const FamilyMix& mix) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [f, r] : mix) j[std::string(to_string(f))] = r;
  return j;
}

nlohmann::ordered_json to_json(const DatasetManifest& m) {
  nlohmann::ordered_json j;
  j["dataset"] = m.dataset;
  j["total"] = m.total;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (Family f : kAllFamilies) {
    const auto it = m.counts.find(f);
    counts[std::string(to_string(f))] = it == m.counts.end() ? 0 : it->second;
  }
  j["counts"] = counts;
  j["config_hash"] = m.config_hash;
  return j;
}

std::filesystem::path manifest_path(const std::filesystem::path& dataset) {
  std::filesystem::path p = dataset;
  p.replace_extension(".manifest.json");
  return p;
}

DatasetManifest write_dataset(std::span<const Query> queries, const std::filesystem::path& path,
                              const std::string& config_hash) {
  DatasetManifest m;
  m.dataset = path.filename().string();
  m.config_hash = config_hash;
  std::string body;
  for (const auto& q : queries) {
    q.validate();
    body += serialize_query(q);
    body += '\n';
    ++m.counts[q.family];
    ++m.total;
  }
  write_text_file(path, body);
  write_text_file(manifest_path(path), to_json(m).dump(2) + "\n");
  return m;
}

std::vector<Query> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open dataset " + path.string());
  std::vector<Query> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      Query q = query_from_json(nlohmann::json::parse(line));
      q.validate();
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.detail());
    }
  }
  return out;
}

}  // namespace embloc
