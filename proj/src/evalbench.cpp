#include "embloc/evalbench.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "embloc/error.hpp"

namespace embloc {

std::string_view to_string(ResponseStatus s) noexcept {
  switch (s) {
    case ResponseStatus::Ok: return "ok";
    case ResponseStatus::Empty: return "empty";
    case ResponseStatus::ParseFailure: return "parse_failure";
    case ResponseStatus::RangeViolation: return "range_violation";
    case ResponseStatus::Missing: return "missing";
  }
  return "unknown";
}

namespace {

ResponseStatus status_from_string(std::string_view s) {
  for (auto st : {ResponseStatus::Ok, ResponseStatus::Empty, ResponseStatus::ParseFailure,
                  ResponseStatus::RangeViolation, ResponseStatus::Missing}) {
    if (to_string(st) == s) return st;
  }
  throw Error(ErrorCode::Format, "unknown response status '" + std::string(s) + "'");
}

std::optional<double> mean_of(const EvalRecord& r, int partition) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& p : r.points) {
    if (!p.depth_error_mm) continue;
    if (partition == 1 && !*p.in_mask) continue;
    if (partition == 2 && *p.in_mask) continue;
    sum += *p.depth_error_mm;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

}  // namespace

std::size_t EvalRecord::in_mask_count() const noexcept {
  std::size_t k = 0;
  for (const auto& p : points) k += p.in_mask.value_or(false) ? 1 : 0;
  return k;
}

std::size_t EvalRecord::dir_passed() const noexcept {
  std::size_t k = 0;
  for (const auto& p : points) k += p.dir_ok ? 1 : 0;
  return k;
}

std::size_t EvalRecord::metric_passed() const noexcept {
  std::size_t k = 0;
  for (const auto& p : points) k += (p.dir_ok && p.metric_ok.value_or(false)) ? 1 : 0;
  return k;
}

double EvalRecord::acc2d() const noexcept {
  return static_cast<double>(in_mask_count()) / static_cast<double>(n);
}

std::optional<double> EvalRecord::mae_in() const { return mean_of(*this, 1); }
std::optional<double> EvalRecord::mae_out() const { return mean_of(*this, 2); }
std::optional<double> EvalRecord::mae_all() const { return mean_of(*this, 0); }

EvalRecord eval_touchable(const PointList& pred, const Mask& gt_mask, const DepthMap& ref_depth) {
  if (gt_mask.width() != ref_depth.width() || gt_mask.height() != ref_depth.height()) {
    throw Error(ErrorCode::InvalidArgument, "mask and reference depth sizes differ");
  }
  EvalRecord r;
  r.family = Family::Touchable;
  if (pred.empty()) {
    r.status = ResponseStatus::Empty;
    return r;
  }
  r.n = pred.size();
  for (const auto& t : pred) {
    PointEval pe;
    pe.target = t;
    const PixelIndex px = normalized_cell_pixel(t.u, t.v, gt_mask.width(), gt_mask.height());
    pe.in_mask = gt_mask.at(px.x, px.y);
    const std::uint32_t ref = ref_depth.at(px.x, px.y);
    if (ref == 0) {
      ++r.mae_excluded;
    } else {
      pe.depth_error_mm = std::fabs(static_cast<double>(t.z) - static_cast<double>(ref));
    }
    r.points.push_back(pe);
  }
  return r;
}

EvalRecord eval_air(const PointList& pred, const Query& q, const Scene& scene, const RelationParams& params) {
  if (!is_air(q.family)) throw Error(ErrorCode::InvalidArgument, "eval_air called on a touchable query");
  std::vector<const SceneObject*> anchors;
  for (std::size_t i = 0; i < q.refs.size(); ++i) {
    const SceneObject& o = scene.at(q.refs[i]);
    if (i < q.gt.anchor_centers.size() && !(q.gt.anchor_centers[i] == o.proxy.center)) {
      throw Error(ErrorCode::Format, "query " + q.id + ": anchor '" + o.id + "' center " +
                                         to_string(q.gt.anchor_centers[i]) + " disagrees with scene " +
                                         to_string(o.proxy.center));
    }
    anchors.push_back(&o);
  }
  const Point3 c = anchors.at(0)->proxy.center;
  const bool between = is_between(q.family);
  const Direction26* dir = between ? nullptr : &direction_from_code(q.direction_code.value());
  std::optional<double> r_star;
  if (has_metric(q.family)) r_star = required_offset(q.gt.offset.value(), anchors[0]->proxy);

  EvalRecord r;
  r.query_id = q.id;
  r.family = q.family;
  if (pred.empty()) {
    r.status = ResponseStatus::Empty;
    return r;
  }
  r.n = pred.size();
  for (const auto& t : pred) {
    PointEval pe;
    pe.target = t;
    if (t.z <= 0) {
      pe.relation_ok = false;
      r.points.push_back(pe);
      continue;
    }
    const Point3 p = back_project(t, scene.cam);
    pe.back_projected = true;
    bool rel = false;
    if (between) {
      rel = in_between_corridor(p, c, anchors[1]->proxy.center, params);
    } else if (!(p == c)) {
      rel = in_direction_cone(p, c, *dir, params);
    }
    pe.relation_ok = rel;
    if (rel) {
      const bool occupied = params.occupancy_check && is_occupied(p, scene, q.refs, params.occupancy_inflation);
      pe.occupancy_ok = !occupied;
      pe.dir_ok = !occupied;
    }
    if (pe.dir_ok && r_star) {
      pe.metric_bias_mm = distance_bias(p, c, *r_star);
      pe.metric_ok = *pe.metric_bias_mm <= params.metric_tol_mm;
    }
    r.points.push_back(pe);
  }
  return r;
}

EvalRecord failed_record(const Query& q, ResponseStatus status) {
  EvalRecord r;
  r.query_id = q.id;
  r.family = q.family;
  r.status = status;
  r.n = 1;
  return r;
}

EvalRecord eval_response(std::string_view response_text, const Query& q, const Scene& scene,
                         const RelationParams& params) {
  const ParseOutcome parsed = try_parse_points(response_text);
  if (parsed.status == ParseStatus::ParseFailure) return failed_record(q, ResponseStatus::ParseFailure);
  if (parsed.status == ParseStatus::RangeViolation) return failed_record(q, ResponseStatus::RangeViolation);
  EvalRecord r;
  if (q.family == Family::Touchable) {
    r = eval_touchable(parsed.points, scene.at(q.gt.mask_object.value()).mask, scene.depth);
  } else {
    r = eval_air(parsed.points, q, scene, params);
  }
  r.query_id = q.id;
  r.family = q.family;
  return r;
}

std::optional<double> Rate::value() const noexcept {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> Mean::value() const noexcept {
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

namespace {

void accumulate(MetricSummary& s, const EvalRecord& r) {
  ++s.queries;
  s.points += r.n;
  if (r.family == Family::Touchable) {
    s.acc2d.add(r.acc2d());
    if (auto v = r.mae_in()) s.mae_in_mm.add(*v);
    if (auto v = r.mae_out()) s.mae_out_mm.add(*v);
    if (auto v = r.mae_all()) s.mae_all_mm.add(*v);
    s.mae_excluded_points += r.mae_excluded;
    return;
  }
  const std::size_t passed = r.dir_passed();
  s.dir_pt.num += passed;
  s.dir_pt.den += r.n;
  s.dir_pt_query_macro.add(static_cast<double>(passed) / static_cast<double>(r.n));
  if (!has_metric(r.family)) return;
  const std::size_t met = r.metric_passed();
  s.met_pt.num += met;
  s.met_pt.den += passed;
  s.full_pt.num += met;
  s.full_pt.den += r.n;
  for (const auto& p : r.points) {
    if (p.dir_ok && p.metric_bias_mm) s.mean_err_cm.add(*p.metric_bias_mm / 10.0);
  }
}

nlohmann::ordered_json rate_json(const Rate& r) {
  nlohmann::ordered_json j;
  if (auto v = r.value()) {
    j["value"] = *v;
  } else {
    j["value"] = nullptr;
  }
  j["num"] = r.num;
  j["den"] = r.den;
  return j;
}

nlohmann::ordered_json mean_json(const Mean& m) {
  nlohmann::ordered_json j;
  if (auto v = m.value()) {
    j["value"] = *v;
  } else {
    j["value"] = nullptr;
  }
  j["sum"] = m.sum;
  j["count"] = m.count;
  return j;
}

nlohmann::ordered_json summary_json(const MetricSummary& s) {
  nlohmann::ordered_json j;
  j["queries"] = s.queries;
  j["points"] = s.points;
  j["acc2d"] = mean_json(s.acc2d);
  j["mae_z_in_mm"] = mean_json(s.mae_in_mm);
  j["mae_z_out_mm"] = mean_json(s.mae_out_mm);
  j["mae_z_all_mm"] = mean_json(s.mae_all_mm);
  j["mae_excluded_points"] = s.mae_excluded_points;
  j["dir_pt"] = rate_json(s.dir_pt);
  j["met_pt"] = rate_json(s.met_pt);
  j["full_pt"] = rate_json(s.full_pt);
  j["mean_err_cm"] = mean_json(s.mean_err_cm);
  j["dir_pt_query_macro"] = mean_json(s.dir_pt_query_macro);
  return j;
}

Rate rate_from(const nlohmann::json& j) { return {j.at("num").get<std::size_t>(), j.at("den").get<std::size_t>()}; }
Mean mean_from(const nlohmann::json& j) { return {j.at("sum").get<double>(), j.at("count").get<std::size_t>()}; }

MetricSummary summary_from(const nlohmann::json& j) {
  MetricSummary s;
  s.queries = j.at("queries").get<std::size_t>();
  s.points = j.at("points").get<std::size_t>();
  s.acc2d = mean_from(j.at("acc2d"));
  s.mae_in_mm = mean_from(j.at("mae_z_in_mm"));
  s.mae_out_mm = mean_from(j.at("mae_z_out_mm"));
  s.mae_all_mm = mean_from(j.at("mae_z_all_mm"));
  s.mae_excluded_points = j.at("mae_excluded_points").get<std::size_t>();
  s.dir_pt = rate_from(j.at("dir_pt"));
  s.met_pt = rate_from(j.at("met_pt"));
  s.full_pt = rate_from(j.at("full_pt"));
  s.mean_err_cm = mean_from(j.at("mean_err_cm"));
  s.dir_pt_query_macro = mean_from(j.at("dir_pt_query_macro"));
  return s;
}

std::string fmt_value(std::optional<double> v, int precision = 4) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

std::string fmt_rate(const Rate& r) {
  return fmt_value(r.value()) + " (" + std::to_string(r.num) + "/" + std::to_string(r.den) + ")";
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

EvalReport aggregate(std::span<const EvalRecord> records, const RelationParams& params) {
  if (records.empty()) throw Error(ErrorCode::InvalidArgument, "cannot aggregate an empty record list");
  EvalReport report;
  report.params = params;
  for (const auto& r : records) {
    accumulate(report.overall, r);
    accumulate(report.by_family[r.family], r);
    ++report.status_counts[r.status];
  }
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["params"] = to_json(report.params);
  j["failure_policy"] =
      "unparseable, out-of-range, empty or missing responses score as one incorrect point (N = 1)";
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (auto st : {ResponseStatus::Ok, ResponseStatus::Empty, ResponseStatus::ParseFailure,
                  ResponseStatus::RangeViolation, ResponseStatus::Missing}) {
    const auto it = report.status_counts.find(st);
    counts[std::string(to_string(st))] = it == report.status_counts.end() ? 0 : it->second;
  }
  j["responses"] = counts;
  j["overall"] = summary_json(report.overall);
  nlohmann::ordered_json fam = nlohmann::ordered_json::object();
  for (const auto& [f, s] : report.by_family) fam[std::string(to_string(f))] = summary_json(s);
  j["by_family"] = fam;
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  try {
    r.params = relation_params_from_json(j.at("params"));
    for (const auto& [k, v] : j.at("responses").items()) {
      const auto n = v.get<std::size_t>();
      if (n > 0) r.status_counts[status_from_string(k)] = n;
    }
    r.overall = summary_from(j.at("overall"));
    for (const auto& [k, v] : j.at("by_family").items()) r.by_family[family_from_string(k)] = summary_from(v);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("report: ") + e.what());
  }
  return r;
}

std::string render_report_table(const EvalReport& report) {
  std::ostringstream os;
  const MetricSummary& all = report.overall;
  char tol[32];
  std::snprintf(tol, sizeof tol, "%g", report.params.metric_tol_mm / 10.0);
  const std::string met_label = std::string("MetPt@") + tol + "cm";

  const auto touch = report.by_family.find(Family::Touchable);
  if (touch != report.by_family.end()) {
    const MetricSummary& t = touch->second;
    os << "Touchable points (" << t.queries << " queries, " << t.points << " points)\n";
    os << "  " << pad("Acc2D", 10) << pad("MAE_Z in (mm)", 16) << pad("MAE_Z out (mm)", 16) << "MAE_Z all (mm)\n";
    os << "  " << pad(fmt_value(t.acc2d.value()), 10) << pad(fmt_value(t.mae_in_mm.value(), 2), 16)
       << pad(fmt_value(t.mae_out_mm.value(), 2), 16) << fmt_value(t.mae_all_mm.value(), 2) << "\n";
    if (t.mae_excluded_points > 0) {
      os << "  (" << t.mae_excluded_points << " points on reference-depth holes excluded from MAE_Z)\n";
    }
    os << "\n";
  }

  if (all.dir_pt.den > 0) {
    os << "Air points (" << (all.queries - (touch != report.by_family.end() ? touch->second.queries : 0))
       << " queries, " << all.dir_pt.den << " points)\n";
    os << "  " << pad("DirPt", 24) << pad(met_label, 24) << pad("FullPt", 24) << "MeanErr (cm)\n";
    os << "  " << pad(fmt_rate(all.dir_pt), 24) << pad(fmt_rate(all.met_pt), 24) << pad(fmt_rate(all.full_pt), 24)
       << fmt_value(all.mean_err_cm.value()) << "\n\n";
  }

  os << "By family\n";
  os << "  " << pad("family", 16) << pad("queries", 9) << pad("points", 8) << pad("DirPt", 9) << pad(met_label, 12)
     << pad("FullPt", 9) << pad("MeanErr", 9) << pad("Acc2D", 9) << "MAE_Z all\n";
  for (const auto& [f, s] : report.by_family) {
    os << "  " << pad(std::string(to_string(f)), 16) << pad(std::to_string(s.queries), 9)
       << pad(std::to_string(s.points), 8) << pad(fmt_value(s.dir_pt.value()), 9)
       << pad(fmt_value(s.met_pt.value()), 12) << pad(fmt_value(s.full_pt.value()), 9)
       << pad(fmt_value(s.mean_err_cm.value()), 9) << pad(fmt_value(s.acc2d.value()), 9)
       << fmt_value(s.mae_all_mm.value(), 2) << "\n";
  }

  std::size_t failures = 0;
  for (const auto& [st, n] : report.status_counts) {
    if (st != ResponseStatus::Ok) failures += n;
  }
  if (failures > 0) {
    os << "\nResponses not scored as point lists:";
    for (const auto& [st, n] : report.status_counts) {
      if (st != ResponseStatus::Ok) os << " " << to_string(st) << "=" << n;
    }
    os << " (each counted as one incorrect point)\n";
  }
  return os.str();
}

}  // namespace embloc
