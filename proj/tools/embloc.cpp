// Command-line front end: gen, encode-depth, predict, eval, selftest, report.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "embloc/depth.hpp"
#include "embloc/depth_io.hpp"
#include "embloc/error.hpp"
#include "embloc/pipeline.hpp"
#include "embloc/rng.hpp"

namespace fs = std::filesystem;
using namespace embloc;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kStrict = 3,
  kIo = 4,
  kFormat = 5,
};

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadMix:
      return kUsage;
    case ErrorCode::Io:
      return kIo;
    case ErrorCode::Format:
    case ErrorCode::ParseFailure:
    case ErrorCode::RangeViolation:
      return kFormat;
    default:
      return kFailure;
  }
}

std::string hash_hex(const nlohmann::ordered_json& j) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

void log_run(std::string_view cmd, const std::string& hash, std::uint64_t seed) {
  std::cerr << "[" << cmd << "] config_hash=" << hash << " seed=" << seed << "\n";
}

Point3 parse_point(const std::string& s) {
  Point3 p;
  char c1 = 0;
  char c2 = 0;
  std::istringstream in(s);
  if (!(in >> p.x >> c1 >> p.y >> c2 >> p.z) || c1 != ',' || c2 != ',') {
    throw Error(ErrorCode::InvalidArgument, "expected x,y,z but got '" + s + "'");
  }
  return p;
}

RelationParams load_relations(const std::string& config_path) {
  if (config_path.empty()) return {};
  const nlohmann::json j = read_json_file(config_path);
  return relation_params_from_json(j.contains("relations") ? j["relations"] : j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embodied 3D point localization: data generation, oracles and evaluation"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate synthetic scenes and a query dataset");
  std::string gen_config;
  std::string gen_mix;
  std::string gen_out;
  std::size_t gen_total = 0;
  std::uint64_t gen_seed = 0;
  int gen_qps = 0;
  int jobs = 1;
  gen->add_option("--config", gen_config, "JSON config file");
  gen->add_option("--total", gen_total, "Number of queries");
  gen->add_option("--mix", gen_mix, "table1, uniform, or a JSON file of family ratios");
  gen->add_option("--seed", gen_seed, "Base seed");
  gen->add_option("--queries-per-scene", gen_qps, "Query slots per synthetic scene");
  gen->add_option("--out", gen_out, "Run directory")->required();
  gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // encode-depth
  auto* enc = app.add_subcommand("encode-depth", "Write a depth PNG as a 3-channel image");
  std::string enc_in;
  std::string enc_out;
  std::string enc_intr;
  std::string enc_vmin;
  std::string enc_vmax;
  bool enc_geometry = false;
  enc->add_option("--depth", enc_in, "16-bit depth PNG in mm")->required()->check(CLI::ExistingFile);
  enc->add_option("--out", enc_out, "Output PNG")->required();
  enc->add_flag("--geometry", enc_geometry, "Quantized camera-frame XYZ instead of 24-bit depth");
  enc->add_option("--intrinsics", enc_intr, "Intrinsics JSON (geometry mode)");
  enc->add_option("--volume-min", enc_vmin, "x,y,z in mm (geometry mode)");
  enc->add_option("--volume-max", enc_vmax, "x,y,z in mm (geometry mode)");

  // predict
  auto* pred = app.add_subcommand("predict", "Run an oracle predictor over a dataset");
  std::string pred_dataset;
  std::string pred_oracle = "perfect";
  std::string pred_out;
  std::uint64_t pred_seed = 1;
  pred->add_option("--dataset", pred_dataset, "dataset.jsonl")->required()->check(CLI::ExistingFile);
  pred->add_option("--oracle", pred_oracle, "perfect, noisy:<sigma>, relation_blind or random");
  pred->add_option("--seed", pred_seed, "Oracle seed");
  pred->add_option("--out", pred_out, "Predictions JSONL")->required();
  pred->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // eval
  auto* ev = app.add_subcommand("eval", "Score predictions against a dataset");
  std::string ev_dataset;
  std::string ev_preds;
  std::string ev_out;
  std::string ev_config;
  bool ev_strict = false;
  ev->add_option("--dataset", ev_dataset, "dataset.jsonl")->required()->check(CLI::ExistingFile);
  ev->add_option("--predictions", ev_preds, "Predictions JSONL ({id, response_text})")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "Report JSON");
  ev->add_option("--config", ev_config, "JSON with relation parameters (or a gen config)");
  ev->add_flag("--strict", ev_strict, "Exit nonzero on any unparseable response");
  ev->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // selftest
  auto* st = app.add_subcommand("selftest", "Generate, predict with oracles and evaluate");
  std::string st_out;
  std::string st_config;
  std::size_t st_total = 300;
  std::uint64_t st_seed = 1;
  std::vector<std::string> st_oracles = {"perfect", "noisy:30", "relation_blind", "random"};
  st->add_option("--out", st_out, "Work directory")->required();
  st->add_option("--config", st_config, "JSON config file");
  st->add_option("--total", st_total, "Number of queries");
  st->add_option("--seed", st_seed, "Base seed");
  st->add_option("--oracle", st_oracles, "Oracles to run");
  st->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // report
  auto* rep = app.add_subcommand("report", "Render a report JSON as tables");
  std::string rep_in;
  rep->add_option("--in", rep_in, "Report JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      GenConfig cfg = gen_config.empty() ? GenConfig{} : gen_config_from_json(read_json_file(gen_config));
      if (gen->count("--total")) cfg.total = gen_total;
      if (gen->count("--seed")) cfg.seed = gen_seed;
      if (gen->count("--queries-per-scene")) cfg.queries_per_scene = gen_qps;
      if (!gen_mix.empty()) {
        if (gen_mix == "table1") {
          cfg.mix = table1_mix();
          cfg.mix_name = "table1";
        } else if (gen_mix == "uniform") {
          cfg.mix = uniform_mix();
          cfg.mix_name = "uniform";
        } else {
          cfg.mix = mix_from_json(read_json_file(gen_mix));
          cfg.mix_name = fs::path(gen_mix).stem().string();
        }
      }
      cfg.validate();
      log_run("gen", config_hash(cfg), cfg.seed);
      const GenResult r = run_gen(cfg, gen_out, jobs);
      std::map<Family, std::size_t> counts;
      for (const auto& q : r.queries) ++counts[q.family];
      std::cout << "wrote " << r.queries.size() << " queries from " << r.scenes << " scenes to " << gen_out << "\n";
      for (const auto& [f, n] : counts) std::cout << "  " << to_string(f) << ": " << n << "\n";
      if (!r.skipped.empty()) std::cout << "  skipped slots: " << r.skipped.size() << " (see manifest.json)\n";
      return kOk;
    }

    if (*enc) {
      const DepthMap d = read_depth_png(enc_in);
      nlohmann::ordered_json opts{{"depth", enc_in}, {"geometry", enc_geometry}};
      if (!enc_geometry) {
        log_run("encode-depth", hash_hex(opts), 0);
        write_encoded_depth_png(enc_out, encode_depth_3ch(d), depth24_layout());
      } else {
        if (enc_intr.empty()) throw Error(ErrorCode::InvalidArgument, "--geometry needs --intrinsics");
        GeometryVolume vol;
        if (!enc_vmin.empty()) vol.min = parse_point(enc_vmin);
        if (!enc_vmax.empty()) vol.max = parse_point(enc_vmax);
        vol.validate();
        opts["volume_min"] = {vol.min.x, vol.min.y, vol.min.z};
        opts["volume_max"] = {vol.max.x, vol.max.y, vol.max.z};
        log_run("encode-depth", hash_hex(opts), 0);
        const CameraIntrinsics cam = read_intrinsics(enc_intr);
        const nlohmann::json layout = {{"encoding", "geometry_xyz_u8"},
                                       {"units", "mm"},
                                       {"volume_min", {vol.min.x, vol.min.y, vol.min.z}},
                                       {"volume_max", {vol.max.x, vol.max.y, vol.max.z}},
                                       {"quantization", "round((v - lo) / (hi - lo) * 255)"}};
        write_encoded_depth_png(enc_out, encode_geometry_map(d, cam, vol), layout);
      }
      std::cout << "wrote " << enc_out << "\n";
      return kOk;
    }

    if (*pred) {
      const OracleKind oracle = parse_oracle(pred_oracle);
      log_run("predict", hash_hex({{"oracle", oracle.name()}, {"seed", pred_seed}}), pred_seed);
      OracleOptions opts;
      opts.seed = pred_seed;
      const auto preds = run_predict(pred_dataset, oracle, opts, jobs);
      write_predictions(pred_out, preds);
      std::cout << "wrote " << preds.size() << " predictions to " << pred_out << "\n";
      return kOk;
    }

    if (*ev) {
      const RelationParams params = load_relations(ev_config);
      log_run("eval", hash_hex(to_json(params)), 0);
      const EvalRun run = run_eval(ev_dataset, read_predictions(ev_preds), params, jobs);
      if (!ev_out.empty()) write_text_file(ev_out, to_json(run).dump(2) + "\n");
      std::cout << render_report_table(run.report);
      if (run.malformed_lines > 0) std::cout << "malformed prediction lines: " << run.malformed_lines << "\n";
      if (run.unknown_ids > 0) std::cout << "predictions with unknown ids: " << run.unknown_ids << "\n";
      if (ev_strict && run.has_format_failures()) {
        std::cerr << "strict: unparseable responses present\n";
        return kStrict;
      }
      return kOk;
    }

    if (*st) {
      GenConfig cfg = st_config.empty() ? GenConfig{} : gen_config_from_json(read_json_file(st_config));
      if (st->count("--total") || st_config.empty()) cfg.total = st_total;
      if (st->count("--seed") || st_config.empty()) cfg.seed = st_seed;
      if (st_config.empty()) {
        cfg.mix = uniform_mix();
        cfg.mix_name = "uniform";
      }
      cfg.validate();
      log_run("selftest", config_hash(cfg), cfg.seed);
      std::vector<OracleKind> oracles;
      for (const auto& o : st_oracles) oracles.push_back(parse_oracle(o));
      const SelftestResult r = selftest(cfg, st_out, oracles, jobs);
      for (const auto& o : oracles) {
        std::cout << "== oracle " << o.name() << " ==\n" << render_report_table(r.reports.at(o.name())) << "\n";
      }
      std::cout << "perfect oracle: " << (r.perfect_ok ? "PASS" : "FAIL") << "\n";
      return r.perfect_ok ? kOk : kFailure;
    }

    if (*rep) {
      const nlohmann::json j = read_json_file(rep_in);
      log_run("report", hash_hex(j.at("params")), 0);
      std::cout << render_report_table(report_from_json(j));
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error[" << to_string(e.code()) << "]: " << e.detail() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
