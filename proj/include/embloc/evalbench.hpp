#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "embloc/outparse.hpp"
#include "embloc/query.hpp"
#include "embloc/relations.hpp"
#include "embloc/scene.hpp"
#include "json.hpp"

namespace embloc {

enum class ResponseStatus { Ok, Empty, ParseFailure, RangeViolation, Missing };

std::string_view to_string(ResponseStatus s) noexcept;

struct PointEval {
  PointTarget target;
  bool back_projected = false;

  // Touchable.
  std::optional<bool> in_mask;
  /// Absent when the reference depth at the predicted pixel is a hole.
  std::optional<double> depth_error_mm;

  // Air.
  std::optional<bool> relation_ok;
  /// Checked only for relation-passing points.
  std::optional<bool> occupancy_ok;
  bool dir_ok = false;
  /// Offset families only, and only on dir-passed points.
  std::optional<double> metric_bias_mm;
  std::optional<bool> metric_ok;
};

struct EvalRecord {
  std::string query_id;
  Family family = Family::DirOnly;
  ResponseStatus status = ResponseStatus::Ok;
  /// Per-query denominator N. Failed or empty responses count as one wrong point.
  std::size_t n = 1;
  std::vector<PointEval> points;
  std::size_t mae_excluded = 0;

  std::size_t in_mask_count() const noexcept;
  std::size_t dir_passed() const noexcept;
  std::size_t metric_passed() const noexcept;
  /// Fraction of the N predicted points inside the valid region.
  double acc2d() const noexcept;
  std::optional<double> mae_in() const;
  std::optional<double> mae_out() const;
  std::optional<double> mae_all() const;
};

/// Mask-hit rate and depth error against the reference depth at the predicted pixels.
EvalRecord eval_touchable(const PointList& pred, const Mask& gt_mask, const DepthMap& ref_depth);

/// Relation, occupancy and conditional distance checks for an air query.
/// Throws Error(Format) if the query's anchors disagree with the scene.
EvalRecord eval_air(const PointList& pred, const Query& q, const Scene& scene, const RelationParams& params);

/// Parses a raw model response and scores it. Unparseable or empty responses
/// score as zero correct points with N = 1.
EvalRecord eval_response(std::string_view response_text, const Query& q, const Scene& scene,
                         const RelationParams& params);

EvalRecord failed_record(const Query& q, ResponseStatus status);

struct Rate {
  std::size_t num = 0;
  std::size_t den = 0;

  /// Absent when the denominator is zero.
  std::optional<double> value() const noexcept;
};

struct Mean {
  double sum = 0;
  std::size_t count = 0;

  std::optional<double> value() const noexcept;
  void add(double v) noexcept {
    sum += v;
    ++count;
  }
};

struct MetricSummary {
  std::size_t queries = 0;
  std::size_t points = 0;

  Mean acc2d;
  Mean mae_in_mm;
  Mean mae_out_mm;
  Mean mae_all_mm;
  std::size_t mae_excluded_points = 0;

  Rate dir_pt;
  Rate met_pt;
  Rate full_pt;
  Mean mean_err_cm;
  /// Per-query average of dir-passed fractions; reported next to the point-level DirPt.
  Mean dir_pt_query_macro;
};

struct EvalReport {
  RelationParams params;
  MetricSummary overall;
  std::map<Family, MetricSummary> by_family;
  std::map<ResponseStatus, std::size_t> status_counts;
};

/// Point-level micro aggregation. Throws Error(InvalidArgument) on an empty list.
EvalReport aggregate(std::span<const EvalRecord> records, const RelationParams& params = {});

nlohmann::ordered_json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// Plain-text tables: touchable (Acc2D, MAE_Z in/out/all), air (DirPt,
/// MetPt, FullPt, MeanErr) and a per-family breakdown.
std::string render_report_table(const EvalReport& report);

}  // namespace embloc
