#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "embloc/datagen.hpp"
#include "embloc/evalbench.hpp"
#include "embloc/harness.hpp"
#include "json.hpp"

namespace embloc {

struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t total = 1000;
  std::string mix_name = "table1";
  FamilyMix mix = table1_mix();
  int queries_per_scene = 16;
  /// Give up on a query slot after this many failed scenes.
  int max_slot_retries = 8;
  int max_scene_retries = 8;
  SyntheticSceneSpec scene;
  RelationParams relations;
  GenOptions options;

  void validate() const;
};

nlohmann::ordered_json to_json(const GenConfig& c);
/// Missing keys keep their defaults.
GenConfig gen_config_from_json(const nlohmann::json& j);

/// 16 hex digits of FNV-1a over the canonical config JSON.
std::string config_hash(const GenConfig& c);

struct SkippedSlot {
  std::size_t slot = 0;
  Family family = Family::DirOnly;
  std::string reason;
};

struct GenResult {
  std::vector<Query> queries;
  std::size_t scenes = 0;
  std::vector<SkippedSlot> skipped;
  std::string config_hash;
};

/// Called once per generated scene, from worker threads, with the queries it produced.
using SceneVisitor = std::function<void(std::size_t scene_index, const SyntheticScene&, std::span<const Query>)>;

/// Generates scenes in fixed rounds and synthesizes the planned query slots.
/// Slots that fail in one scene move to a later one. Output is independent of `jobs`.
/// With a non-empty `out_dir`, scene assets are written under out_dir/scenes/.
GenResult generate_queries(const GenConfig& config, const std::filesystem::path& out_dir, int jobs = 1,
                           const SceneVisitor& visitor = {});

/// generate_queries plus dataset.jsonl, its manifest and the run manifest.json.
GenResult run_gen(const GenConfig& config, const std::filesystem::path& out_dir, int jobs = 1);

struct Prediction {
  std::string id;
  std::string response_text;
};

void write_predictions(const std::filesystem::path& path, std::span<const Prediction> preds);

struct PredictionFile {
  std::map<std::string, std::string> responses;
  /// Lines that are not a JSON object with string id and response_text.
  std::size_t malformed_lines = 0;
};

/// Throws Error(Format) on duplicate ids.
PredictionFile read_predictions(const std::filesystem::path& path);

/// Runs an oracle over every query of a dataset, in dataset order.
std::vector<Prediction> run_predict(const std::filesystem::path& dataset, const OracleKind& oracle,
                                    const OracleOptions& opts = {}, int jobs = 1);

struct EvalRun {
  std::vector<EvalRecord> records;
  EvalReport report;
  std::size_t malformed_lines = 0;
  std::size_t unknown_ids = 0;

  /// True when any response failed to parse or a line was malformed.
  bool has_format_failures() const;
};

EvalRun run_eval(const std::filesystem::path& dataset, const PredictionFile& preds, const RelationParams& params,
                 int jobs = 1);

nlohmann::ordered_json to_json(const EvalRun& run);

struct SelftestResult {
  std::map<std::string, EvalReport> reports;
  bool perfect_ok = false;
};

/// Generates a dataset under work_dir, runs each oracle and evaluates it.
SelftestResult selftest(const GenConfig& config, const std::filesystem::path& work_dir,
                        std::span<const OracleKind> oracles, int jobs = 1);

/// Exact check of the Perfect-oracle outcome: every rate 1, every error 0.
bool is_perfect(const EvalReport& report);

}  // namespace embloc
