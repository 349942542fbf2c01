#include <doctest.h>

#include "hankel/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

using namespace hankel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hankel_pipeline_tests" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

// Data rows of a CSV artifact keyed by the first column.
std::map<std::string, std::vector<double>> csv_rows(const fs::path& path) {
  std::map<std::string, std::vector<double>> rows;
  std::istringstream is(slurp(path));
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream fields(line);
    std::string key, cell;
    std::getline(fields, key, ',');
    std::vector<double> values;
    while (std::getline(fields, cell, ',')) values.push_back(cell.empty() ? std::nan("") : std::stod(cell));
    rows[key] = values;
  }
  return rows;
}

RunResult run(const std::string& command, const json& config, const fs::path& dir, RunOptions options = {}) {
  options.out_dir = dir.string();
  return run_command(command, config.dump(), options);
}

json discrete_alpha1() {
  return {{"model", {{"kind", "discrete"}, {"alpha", 1.0}, {"terms", {{{"zeta", {1.0, 0.0}}, {"b", {1.0, 0.0}}}}}}}};
}

json geometric_config(std::size_t n) {
  return {{"model", {{"kind", "sequence"}, {"formula", "geometric"}, {"ratio", 0.5}}},
          {"operator", {{"N", n}}},
          {"spectrum", {{"k", 3}, {"seed", 1}}}};
}

json bump_config(int m, double alpha) {
  return {{"model", {{"kind", "continuous"}, {"alpha", alpha}, {"local_bump", {{"t0", 1.0}, {"m", m}}}}},
          {"operator", {{"mesh", {{"panels", 40}, {"nodes_per_panel", 8}}}}},
          {"spectrum", {{"k", 45}, {"seed", 1}}},
          {"analysis", {{"window", {5, 40}}, {"fixed_alpha", true}, {"tolerance", {{"alpha", 0.02}, {"c", 0.02}}}}}};
}

json synthetic_config() {
  return {{"model",
           {{"kind", "synthetic"},
            {"blocks", {{{"values", {1.0, 0.5, 0.25, 0.125}}}, {{"values", {1.0 / 3, 1.0 / 9, 1.0 / 27}}}}},
            {"seed", 5}}},
          {"spectrum", {{"k", 1}, {"seed", 1}}},
          {"analysis", {{"eps_grid", {{"hi", 1.2}, {"lo", 0.01}}}}}};
}

} // namespace

TEST_CASE("gen writes the model sequence") {
  auto cfg = discrete_alpha1();
  cfg["gen"] = {{"range", {0, 10}}};
  const auto dir = fresh_dir("gen_model");
  const auto r = run("gen", cfg, dir);
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(dir / "sequence.csv");
  REQUIRE(rows.count("2"));
  CHECK(rows.at("2")[0] == doctest::Approx(0.72135).epsilon(1e-5));
  CHECK(rows.at("2")[1] == 0.0);
  CHECK(rows.size() == 11);
  const std::string text = slurp(dir / "sequence.csv");
  CHECK(text.find("# config_hash=" + r.config_hash) != std::string::npos);
  CHECK(text.find(std::string("# tool=hankel ") + tool_version) != std::string::npos);
}

TEST_CASE("gen writes a tau trace") {
  auto cfg = discrete_alpha1();
  cfg["gen"] = {{"traces", {{{"name", "t"}, {"symbol", "tau"}, {"m", 0}, {"t0", 1.5},
                             {"grid", {{"from", 0.0}, {"to", 2.0}, {"count", 5}}}}}}};
  const auto dir = fresh_dir("gen_tau");
  REQUIRE(run("gen", cfg, dir).exit_code == 0);
  const auto rows = csv_rows(dir / "trace_t.csv");
  REQUIRE(rows.count("0"));
  CHECK(std::abs(rows.at("0")[0] - 1.5) <= 1e-12);
  CHECK(std::abs(rows.at("0")[1]) <= 1e-12);
}

TEST_CASE("gen rejects an empty term list") {
  json cfg = {{"model", {{"kind", "discrete"}, {"alpha", 1.0}, {"terms", json::array()}}}};
  const auto r = run("gen", cfg, fresh_dir("gen_empty"));
  CHECK(r.exit_code == 2);
  CHECK(r.error.find("terms") != std::string::npos);
}

TEST_CASE("spectrum of the rank-one config") {
  const auto dir = fresh_dir("spectrum_rank_one");
  const auto r = run("spectrum", geometric_config(256), dir);
  REQUIRE(r.exit_code == 0);
  const auto doc = json::parse(slurp(dir / "spectrum.json"));
  CHECK(doc["config_hash"] == r.config_hash);
  const auto values = doc["series"][0]["values"].get<std::vector<double>>();
  CHECK(std::abs(values[0] - 4.0 / 3.0) <= 1e-9);
  const auto rows = csv_rows(dir / "spectrum_N256.csv");
  CHECK(std::abs(rows.at("1")[0] - 4.0 / 3.0) <= 1e-9);
}

TEST_CASE("spectrum of the bump kernel") {
  const auto dir = fresh_dir("spectrum_bump");
  const auto r = run("spectrum", bump_config(0, 1.0), dir);
  REQUIRE(r.exit_code == 0);
  const auto rows = csv_rows(dir / "spectrum_N320.csv");
  CHECK(rows.at("1")[0] == doctest::Approx(0.63662).epsilon(1e-5));
  CHECK(rows.at("2")[0] == doctest::Approx(0.21221).epsilon(1e-4));
  CHECK(rows.at("1")[1] == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-6));
  CHECK(rows.at("1")[2] == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("spectrum rejects k above N/4") {
  auto cfg = geometric_config(64);
  cfg["spectrum"]["k"] = 17;
  const auto r = run("spectrum", cfg, fresh_dir("spectrum_k"));
  CHECK(r.exit_code == 2);
  CHECK(r.error.find("N/4") != std::string::npos);
}

TEST_CASE("spectrum requires a seed") {
  auto cfg = geometric_config(64);
  cfg["spectrum"].erase("seed");
  CHECK(run("spectrum", cfg, fresh_dir("spectrum_seed")).exit_code == 2);
  RunOptions options;
  options.seed = 4;
  CHECK(run("spectrum", cfg, fresh_dir("spectrum_seed_flag"), options).exit_code == 0);
}

TEST_CASE("verify the bump law") {
  const auto dir = fresh_dir("verify_bump");
  const auto r = run("verify", bump_config(0, 1.0), dir);
  const auto doc = json::parse(slurp(dir / "verify.json"));
  CHECK(doc["predicted"]["c"].get<double>() == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
  // Window mean of n s_n under the exact law 1/(pi (n - 1/2)).
  double mean = 0.0;
  for (int n = 5; n <= 40; ++n) mean += n / (std::numbers::pi * (n - 0.5)) / 36.0;
  const auto fit = doc["fits"][0]["fit"];
  CHECK(fit["c_hat"].get<double>() == doctest::Approx(mean).epsilon(1e-5));
  const double deviation = std::abs(mean * std::numbers::pi - 1.0);
  CHECK(doc["checks"]["c"].get<bool>() == (deviation <= 0.02));
  CHECK(doc["checks"]["alpha"].get<bool>() == (std::abs(fit["alpha_hat"].get<double>() - 1.0) <= 0.02));
  CHECK(r.exit_code == (doc["verdict"] == "pass" ? 0 : 1));
}

TEST_CASE("verify refuses artifacts with a different hash") {
  const auto dir = fresh_dir("verify_hash");
  auto cfg = geometric_config(256);
  cfg["model"] = {{"kind", "sequence"}, {"formula", "model"}, {"alpha", 1.0}};
  cfg["spectrum"]["k"] = 10;
  cfg["analysis"] = {{"predicted", {{"c", 0.5}, {"alpha", 1.0}}}, {"window", {2, 9}}};
  REQUIRE(run("spectrum", cfg, dir).exit_code == 0);

  auto loaded = run("verify", cfg, dir);
  CHECK(loaded.exit_code <= 1);
  CHECK(json::parse(slurp(dir / "verify.json"))["spectrum_source"] == "loaded");

  auto changed = cfg;
  changed["spectrum"]["tol"] = 1e-9;
  const auto refused = run("verify", changed, dir);
  CHECK(refused.exit_code == 2);
  CHECK(refused.error.find("hash") != std::string::npos);

  RunOptions options;
  options.recompute = true;
  const auto recomputed = run("verify", changed, dir, options);
  CHECK(recomputed.exit_code <= 1);
  CHECK(json::parse(slurp(dir / "verify.json"))["spectrum_source"] == "computed");
}

TEST_CASE("verify rejects a bump with a mismatched alpha") {
  const auto r = run("verify", bump_config(0, 2.0), fresh_dir("verify_alpha"));
  CHECK(r.exit_code == 2);
  CHECK(r.error.find("alpha") != std::string::npos);
}

TEST_CASE("localize rejects coinciding singular points") {
  json cfg = {{"model",
               {{"kind", "discrete"},
                {"alpha", 1.0},
                {"terms", {{{"zeta", {1.0, 0.0}}, {"b", {1.0, 0.0}}}, {{"zeta", {1.0, 0.0}}, {"b", {0.5, 0.0}}}}}}},
              {"operator", {{"N", 256}}},
              {"spectrum", {{"k", 20}, {"seed", 1}}}};
  CHECK(run("localize", cfg, fresh_dir("localize_dup")).exit_code == 2);

  json parts = {{"model", discrete_alpha1()["model"]},
                {"parts", {discrete_alpha1()["model"], discrete_alpha1()["model"]}},
                {"operator", {{"N", 256}}},
                {"spectrum", {{"k", 20}, {"seed", 1}}}};
  const auto r = run("localize", parts, fresh_dir("localize_dup_parts"));
  CHECK(r.exit_code == 2);
  CHECK(r.error.find("distinct") != std::string::npos);
}

TEST_CASE("localize synthetic blocks") {
  const auto dir = fresh_dir("localize_synthetic");
  const auto r = run("localize", synthetic_config(), dir);
  REQUIRE(r.exit_code == 0);
  const auto doc = json::parse(slurp(dir / "localize.json"));
  CHECK(doc["report"]["max_discrepancy"].get<double>() == 0.0);
  const auto rows = csv_rows(dir / "localize.csv");
  CHECK(rows.size() > 10);
  for (const auto& [eps, counts] : rows) CHECK(counts[0] == counts[1]);
}

TEST_CASE("unknown fields are rejected") {
  auto cfg = geometric_config(64);
  cfg["spectrum"]["kk"] = 3;
  auto r = run("spectrum", cfg, fresh_dir("unknown_field"));
  CHECK(r.exit_code == 2);
  CHECK(r.error.find("kk") != std::string::npos);

  cfg = geometric_config(64);
  cfg["extra"] = 1;
  CHECK(run("spectrum", cfg, fresh_dir("unknown_top")).exit_code == 2);
  CHECK(run("mystery", geometric_config(64), fresh_dir("unknown_command")).exit_code == 2);
  CHECK(run_command("spectrum", "{not json", {}).exit_code == 2);
}

TEST_CASE("runs are bitwise deterministic") {
  for (const auto& [command, cfg] : {std::pair{std::string("spectrum"), bump_config(1, 2.0)},
                                     std::pair{std::string("localize"), synthetic_config()}}) {
    CAPTURE(command);
    const auto a = fresh_dir("determinism_a"), b = fresh_dir("determinism_b");
    RunOptions three;
    three.threads = 3;
    const auto ra = run(command, cfg, a), rb = run(command, cfg, b, three);
    REQUIRE(ra.exit_code == rb.exit_code);
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto name = entry.path().filename();
      if (name == "run_record.json") continue;
      CAPTURE(name.string());
      REQUIRE(fs::exists(b / name));
      CHECK(slurp(entry.path()) == slurp(b / name));
      ++compared;
    }
    CHECK(compared >= 2);
  }
}

TEST_CASE("config hash") {
  const std::string a = R"({"model":{"kind":"sequence","formula":"geometric","ratio":0.5},"spectrum":{"k":3,"seed":1}})";
  const std::string b = R"({"spectrum":{"seed":1,"k":3},"model":{"ratio":0.5,"formula":"geometric","kind":"sequence"}})";
  const std::string c = R"({"spectrum":{"seed":1,"k":3},"model":{"ratio":0.5,"formula":"geometric","kind":"sequence"},
                            "output":{"dir":"elsewhere"}})";
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) == config_hash(c));
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a, 2) != config_hash(a));
  CHECK(config_hash(a, 1) == config_hash(a));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("exit codes for error kinds") {
  CHECK(exit_code_for(ErrorKind::validation) == ExitCode::validation);
  CHECK(exit_code_for(ErrorKind::domain) == ExitCode::validation);
  CHECK(exit_code_for(ErrorKind::length) == ExitCode::validation);
  CHECK(exit_code_for(ErrorKind::convergence) == ExitCode::runtime);
  CHECK(exit_code_for(ErrorKind::io) == ExitCode::runtime);
}
