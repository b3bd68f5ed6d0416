#include "embloc/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "embloc/depth_io.hpp"
#include "embloc/error.hpp"
#include "embloc/rng.hpp"
#include "embloc/scene_io.hpp"

namespace embloc {

namespace {

constexpr std::size_t kScenesPerRound = 16;

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Slot {
  std::size_t index = 0;
  Family family = Family::DirOnly;
  int retries = 0;
};

struct SceneJob {
  std::size_t scene_index = 0;
  std::vector<Slot> slots;
};

struct SceneOutcome {
  std::vector<std::pair<std::size_t, Query>> queries;
  std::vector<std::pair<Slot, std::string>> failed;
};

std::string slot_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%07zu", index);
  return buf;
}

std::string scene_dir_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%06zu", index);
  return buf;
}

SceneFiles scene_files(const std::filesystem::path& base, const Query& q) {
  return {base / q.depth, base / q.intrinsics, base / q.detections};
}

/// Query indices grouped by scene so every scene is loaded once.
std::vector<std::vector<std::size_t>> group_by_scene(const std::vector<Query>& queries) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < queries.size(); ++i) groups[queries[i].depth].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(groups.size());
  for (auto& [k, v] : groups) out.push_back(std::move(v));
  return out;
}

std::string rel(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.lexically_relative(base).generic_string();
}

}  // namespace

void GenConfig::validate() const {
  if (queries_per_scene < 1) throw Error(ErrorCode::InvalidArgument, "queries_per_scene must be >= 1");
  if (max_slot_retries < 0 || max_scene_retries < 1) throw Error(ErrorCode::InvalidArgument, "retry limits");
  plan_mix(0, mix);
  scene.validate();
  relations.validate();
  options.validate();
}

nlohmann::ordered_json to_json(const GenConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["total"] = c.total;
  j["mix_name"] = c.mix_name;
  j["mix"] = to_json(c.mix);
  j["queries_per_scene"] = c.queries_per_scene;
  j["max_slot_retries"] = c.max_slot_retries;
  j["max_scene_retries"] = c.max_scene_retries;
  nlohmann::ordered_json scene = to_json(c.scene);
  scene.erase("seed");
  j["scene"] = scene;
  j["relations"] = to_json(c.relations);
  j["options"] = to_json(c.options);
  return j;
}

GenConfig gen_config_from_json(const nlohmann::json& j) {
  GenConfig c;
  try {
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("total")) c.total = j["total"].get<std::size_t>();
    if (j.contains("mix")) {
      const auto& m = j["mix"];
      if (m.is_string()) {
        c.mix_name = m.get<std::string>();
        if (c.mix_name == "table1") {
          c.mix = table1_mix();
        } else if (c.mix_name == "uniform") {
          c.mix = uniform_mix();
        } else {
          throw Error(ErrorCode::BadMix, "unknown mix '" + c.mix_name + "'");
        }
      } else {
        c.mix = mix_from_json(m);
        c.mix_name = j.value("mix_name", std::string("custom"));
      }
    }
    if (j.contains("queries_per_scene")) c.queries_per_scene = j["queries_per_scene"].get<int>();
    if (j.contains("max_slot_retries")) c.max_slot_retries = j["max_slot_retries"].get<int>();
    if (j.contains("max_scene_retries")) c.max_scene_retries = j["max_scene_retries"].get<int>();
    if (j.contains("scene")) c.scene = scene_spec_from_json(j["scene"]);
    if (j.contains("relations")) c.relations = relation_params_from_json(j["relations"]);
    if (j.contains("options")) c.options = gen_options_from_json(j["options"]);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string config_hash(const GenConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

GenResult generate_queries(const GenConfig& config, const std::filesystem::path& out_dir, int jobs,
                           const SceneVisitor& visitor) {
  config.validate();
  GenResult result;
  result.config_hash = config_hash(config);

  const FamilyCounts counts = plan_mix(config.total, config.mix);
  std::vector<Family> families;
  families.reserve(config.total);
  for (const auto& [f, n] : counts) families.insert(families.end(), n, f);
  Rng order(derive_seed(config.seed, 0x510750));
  order.shuffle(std::span<Family>(families));

  std::deque<Slot> pending;
  for (std::size_t i = 0; i < families.size(); ++i) pending.push_back({i, families[i], 0});

  const std::uint64_t scene_base = derive_seed(config.seed, 0x5CE4E);
  const std::uint64_t query_base = derive_seed(config.seed, 0x0E41);
  std::vector<std::pair<std::size_t, Query>> produced;
  std::size_t next_scene = 0;

  while (!pending.empty()) {
    std::vector<SceneJob> round;
    while (round.size() < kScenesPerRound && !pending.empty()) {
      SceneJob job{next_scene++, {}};
      while (job.slots.size() < static_cast<std::size_t>(config.queries_per_scene) && !pending.empty()) {
        job.slots.push_back(pending.front());
        pending.pop_front();
      }
      round.push_back(std::move(job));
    }

    std::vector<SceneOutcome> outcomes(round.size());
    parallel_for(round.size(), jobs, [&](std::size_t k) {
      const SceneJob& job = round[k];
      SceneOutcome& out = outcomes[k];
      SyntheticScene synth;
      std::string failure;
      bool ok = false;
      for (int attempt = 0; attempt < config.max_scene_retries && !ok; ++attempt) {
        SyntheticSceneSpec spec = config.scene;
        spec.seed = derive_seed(derive_seed(scene_base, job.scene_index), static_cast<std::uint64_t>(attempt));
        try {
          synth = generate_scene(spec);
          ok = true;
        } catch (const Error& e) {
          failure = e.what();
        }
      }
      if (!ok) {
        for (const Slot& s : job.slots) out.failed.emplace_back(s, "scene generation: " + failure);
        return;
      }

      QueryContext ctx;
      if (!out_dir.empty()) {
        const SceneAssetPaths paths = write_scene_assets(synth, out_dir / "scenes" / scene_dir_name(job.scene_index));
        ctx.image = rel(paths.image, out_dir);
        ctx.depth = rel(paths.depth, out_dir);
        ctx.intrinsics = rel(paths.intrinsics, out_dir);
        ctx.detections = rel(paths.detections, out_dir);
      }
      std::vector<Query> made;
      for (const Slot& s : job.slots) {
        ctx.id = slot_id(s.index);
        const std::uint64_t seed = derive_seed(derive_seed(query_base, s.index), static_cast<std::uint64_t>(s.retries));
        try {
          made.push_back(synthesize_query(synth.scene, s.family, seed, config.relations, config.options, ctx));
          out.queries.emplace_back(s.index, made.back());
        } catch (const Error& e) {
          out.failed.emplace_back(s, e.what());
        }
      }
      if (visitor) visitor(job.scene_index, synth, made);
    });

    for (auto& out : outcomes) {
      for (auto& q : out.queries) produced.push_back(std::move(q));
      for (auto& [slot, reason] : out.failed) {
        Slot s = slot;
        if (++s.retries > config.max_slot_retries) {
          result.skipped.push_back({s.index, s.family, reason});
        } else {
          pending.push_back(s);
        }
      }
    }
  }

  std::sort(produced.begin(), produced.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  result.queries.reserve(produced.size());
  for (auto& [i, q] : produced) result.queries.push_back(std::move(q));
  std::sort(result.skipped.begin(), result.skipped.end(),
            [](const SkippedSlot& a, const SkippedSlot& b) { return a.slot < b.slot; });
  result.scenes = next_scene;
  return result;
}

GenResult run_gen(const GenConfig& config, const std::filesystem::path& out_dir, int jobs) {
  std::filesystem::create_directories(out_dir);
  GenResult result = generate_queries(config, out_dir, jobs);
  const DatasetManifest dm = write_dataset(result.queries, out_dir / "dataset.jsonl", result.config_hash);

  nlohmann::ordered_json m;
  m["config_hash"] = result.config_hash;
  m["seed"] = config.seed;
  m["dataset"] = "dataset.jsonl";
  m["scenes"] = result.scenes;
  m["queries"] = dm.total;
  m["planned"] = config.total;
  m["counts"] = to_json(dm)["counts"];
  nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
  for (const auto& s : result.skipped) {
    skipped.push_back({{"slot", s.slot}, {"family", to_string(s.family)}, {"reason", s.reason}});
  }
  m["skipped"] = skipped;
  m["config"] = to_json(config);
  write_text_file(out_dir / "manifest.json", m.dump(2) + "\n");
  return result;
}

void write_predictions(const std::filesystem::path& path, std::span<const Prediction> preds) {
  std::string body;
  for (const auto& p : preds) {
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["response_text"] = p.response_text;
    body += j.dump();
    body += '\n';
  }
  write_text_file(path, body);
}

PredictionFile read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open predictions " + path.string());
  PredictionFile out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") || !j["id"].is_string() ||
        !j.contains("response_text") || !j["response_text"].is_string()) {
      ++out.malformed_lines;
      continue;
    }
    const auto id = j["id"].get<std::string>();
    if (!out.responses.emplace(id, j["response_text"].get<std::string>()).second) {
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(lineno) + ": duplicate id '" + id + "'");
    }
  }
  return out;
}

std::vector<Prediction> run_predict(const std::filesystem::path& dataset, const OracleKind& oracle,
                                    const OracleOptions& opts, int jobs) {
  const std::vector<Query> queries = read_dataset(dataset);
  const std::filesystem::path base = dataset.parent_path();
  const auto groups = group_by_scene(queries);
  std::vector<Prediction> out(queries.size());
  parallel_for(groups.size(), jobs, [&](std::size_t g) {
    const Scene scene = load_scene(scene_files(base, queries[groups[g].front()]));
    for (std::size_t i : groups[g]) {
      out[i] = {queries[i].id, serialize_points(run_oracle(oracle, queries[i], scene, opts))};
    }
  });
  return out;
}

bool EvalRun::has_format_failures() const {
  if (malformed_lines > 0) return true;
  for (auto st : {ResponseStatus::ParseFailure, ResponseStatus::RangeViolation}) {
    const auto it = report.status_counts.find(st);
    if (it != report.status_counts.end() && it->second > 0) return true;
  }
  return false;
}

EvalRun run_eval(const std::filesystem::path& dataset, const PredictionFile& preds, const RelationParams& params,
                 int jobs) {
  params.validate();
  const std::vector<Query> queries = read_dataset(dataset);
  const std::filesystem::path base = dataset.parent_path();
  const auto groups = group_by_scene(queries);
  EvalRun run;
  run.records.resize(queries.size());
  parallel_for(groups.size(), jobs, [&](std::size_t g) {
    const Scene scene = load_scene(scene_files(base, queries[groups[g].front()]));
    for (std::size_t i : groups[g]) {
      const Query& q = queries[i];
      const auto it = preds.responses.find(q.id);
      run.records[i] = it == preds.responses.end() ? failed_record(q, ResponseStatus::Missing)
                                                   : eval_response(it->second, q, scene, params);
    }
  });
  std::size_t matched = 0;
  for (const auto& q : queries) matched += preds.responses.count(q.id);
  run.unknown_ids = preds.responses.size() - matched;
  run.malformed_lines = preds.malformed_lines;
  run.report = aggregate(run.records, params);
  return run;
}

nlohmann::ordered_json to_json(const EvalRun& run) {
  nlohmann::ordered_json j = to_json(run.report);
  j["predictions"] = {{"malformed_lines", run.malformed_lines}, {"unknown_ids", run.unknown_ids}};
  return j;
}

bool is_perfect(const EvalReport& r) {
  const MetricSummary& s = r.overall;
  if (s.queries == 0) return false;
  for (const auto& [st, n] : r.status_counts) {
    if (st != ResponseStatus::Ok && n > 0) return false;
  }
  auto full = [](const Rate& x) { return x.num == x.den; };
  auto zero_or_absent = [](const Mean& m) { return !m.value() || *m.value() == 0.0; };
  const bool acc_ok = !s.acc2d.value() || *s.acc2d.value() == 1.0;
  return full(s.dir_pt) && full(s.met_pt) && full(s.full_pt) && zero_or_absent(s.mean_err_cm) && acc_ok &&
         zero_or_absent(s.mae_all_mm);
}

SelftestResult selftest(const GenConfig& config, const std::filesystem::path& work_dir,
                        std::span<const OracleKind> oracles, int jobs) {
  const std::filesystem::path data = work_dir / "data";
  run_gen(config, data, jobs);
  SelftestResult out;
  out.perfect_ok = true;
  for (const OracleKind& o : oracles) {
    std::string name = o.name();
    std::replace(name.begin(), name.end(), ':', '_');
    const auto pred_path = work_dir / ("pred_" + name + ".jsonl");
    OracleOptions opts;
    opts.seed = config.seed;
    const auto preds = run_predict(data / "dataset.jsonl", o, opts, jobs);
    write_predictions(pred_path, preds);
    const EvalRun run = run_eval(data / "dataset.jsonl", read_predictions(pred_path), config.relations, jobs);
    write_text_file(work_dir / ("report_" + name + ".json"), to_json(run).dump(2) + "\n");
    if (o.kind == OracleKind::Kind::Perfect) out.perfect_ok = out.perfect_ok && is_perfect(run.report);
    out.reports[o.name()] = run.report;
  }
  return out;
}

}  // namespace embloc
