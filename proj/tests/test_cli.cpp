#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "embloc/datagen.hpp"
#include "embloc/depth_io.hpp"
#include "fixtures.hpp"

using namespace embloc;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run(const fixtures::TempDir& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + EMBLOC_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const std::filesystem::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen, predict, eval and report") {
  fixtures::TempDir dir("cli");
  const auto data = dir / "data";
  RunResult r = run(dir, "gen --total 60 --mix uniform --seed 5 --out " + q(data));
  REQUIRE(r.code == 0);
  CHECK(r.err.find("[gen] config_hash=") != std::string::npos);
  CHECK(r.err.find("seed=5") != std::string::npos);
  CHECK(r.out.find("wrote 60 queries") != std::string::npos);
  CHECK(std::filesystem::exists(data / "manifest.json"));
  CHECK(std::filesystem::exists(data / "dataset.manifest.json"));

  r = run(dir, "predict --dataset " + q(data / "dataset.jsonl") + " --oracle perfect --out " + q(dir / "p.jsonl"));
  REQUIRE(r.code == 0);
  r = run(dir, "eval --strict --dataset " + q(data / "dataset.jsonl") + " --predictions " + q(dir / "p.jsonl") +
                   " --out " + q(dir / "report.json"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("DirPt") != std::string::npos);
  CHECK(r.out.find("MetPt@5cm") != std::string::npos);
  const auto report = read_json_file(dir / "report.json");
  CHECK(report["overall"]["dir_pt"]["value"] == 1.0);
  CHECK(report["overall"]["acc2d"]["value"] == 1.0);

  r = run(dir, "report --in " + q(dir / "report.json"));
  CHECK(r.code == 0);
  CHECK(r.out.find("By family") != std::string::npos);

  // One response replaced with prose: lenient mode scores it as a miss, strict mode exits 3.
  std::string preds = slurp(dir / "p.jsonl");
  const auto first_end = preds.find('\n');
  const auto first = nlohmann::json::parse(preds.substr(0, first_end));
  preds = nlohmann::json{{"id", first["id"]}, {"response_text", "I cannot see that."}}.dump() +
          preds.substr(first_end);
  write_text_file(dir / "bad.jsonl", preds);
  const std::string ev = "eval --dataset " + q(data / "dataset.jsonl") + " --predictions " + q(dir / "bad.jsonl");
  CHECK(run(dir, ev).code == 0);
  r = run(dir, ev + " --strict");
  CHECK(r.code == 3);
}

TEST_CASE("gen with the reference mix matches plan_mix exactly") {
  fixtures::TempDir dir("cli_mix");
  const RunResult r = run(dir, "gen --total 1000 --mix table1 --out " + q(dir / "d") + " --jobs 2");
  REQUIRE(r.code == 0);
  const auto m = read_json_file(dir / "d/manifest.json");
  CHECK(m["queries"] == 1000);
  CHECK(m["skipped"].empty());
  for (const auto& [f, n] : plan_mix(1000, table1_mix())) {
    CHECK(m["counts"][std::string(to_string(f))] == n);
  }
}

TEST_CASE("selftest exits zero when the perfect oracle is exact") {
  fixtures::TempDir dir("cli_selftest");
  const RunResult r = run(dir, "selftest --total 80 --out " + q(dir / "w"));
  CHECK(r.code == 0);
  CHECK(r.out.find("perfect oracle: PASS") != std::string::npos);
  CHECK(r.out.find("== oracle relation_blind ==") != std::string::npos);
}

TEST_CASE("encode-depth writes decodable images") {
  fixtures::TempDir dir("cli_enc");
  std::vector<std::uint32_t> v(8 * 6);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1000 + static_cast<std::uint32_t>(i) * 37;
  const DepthMap d(8, 6, v);
  write_depth_png(dir / "d.png", d);
  REQUIRE(run(dir, "encode-depth --depth " + q(dir / "d.png") + " --out " + q(dir / "e.png")).code == 0);
  const DepthMap back = decode_depth_3ch(read_rgb_png(dir / "e.png"));
  CHECK(std::ranges::equal(back.values(), d.values()));

  write_intrinsics(dir / "i.json", {10, 10, 4, 3, 8, 6});
  const RunResult g = run(dir, "encode-depth --geometry --depth " + q(dir / "d.png") + " --intrinsics " +
                                   q(dir / "i.json") + " --volume-min=-500,-500,0 --volume-max 500,500,4000 --out " +
                                   q(dir / "g.png"));
  CHECK(g.code == 0);
  CHECK(read_rgb_png(dir / "g.png").width == 8);
  CHECK(run(dir, "encode-depth --geometry --depth " + q(dir / "d.png") + " --out " + q(dir / "h.png")).code == 2);
}

TEST_CASE("usage and input errors map to exit codes") {
  fixtures::TempDir dir("cli_err");
  write_text_file(dir / "mix.json", R"({"dir_only": 0.5, "between": 0.4})");
  RunResult r = run(dir, "gen --total 10 --mix " + q(dir / "mix.json") + " --out " + q(dir / "x"));
  CHECK(r.code == 2);
  CHECK(r.err.find("error[BadMix]") != std::string::npos);
  CHECK(run(dir, "gen --total 10").code != 0);
  CHECK(run(dir, "predict --dataset " + q(dir / "mix.json") + " --oracle clairvoyant --out " + q(dir / "p")).code == 2);
  write_text_file(dir / "ds.jsonl", "{}\n");
  CHECK(run(dir, "predict --dataset " + q(dir / "ds.jsonl") + " --out " + q(dir / "p")).code == 5);
}

}
