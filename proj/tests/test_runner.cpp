#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cmofl/core/errors.hpp"
#include "cmofl/runner/manifest.hpp"
#include "cmofl/runner/runner.hpp"
#include "doctest.h"

using namespace cmofl;
using namespace cmofl::runner;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() /
             ("cmofl_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

RunManifest small_nsga2(const fs::path& out) {
  auto m = parse_manifest(json::parse(R"({
    "algorithm": "nsga2", "problem": {"name": "zdt1", "dimension": 4},
    "seeds": [3], "budget": {"generations": 6, "population": 8}})"));
  m.output_dir = out.string();
  return m;
}

void expect_same_tree(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a)) names.push_back(e.path().filename().string());
  std::size_t nb = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) ++nb;
  CHECK(names.size() == nb);
  for (const auto& n : names) {
    INFO(n);
    CHECK(slurp(a / n) == slurp(b / n));
  }
}

}  // namespace

TEST_CASE("manifest defaults and overrides") {
  auto m = parse_manifest(json::object());
  CHECK(m.algorithm == Algorithm::kNsga2);
  CHECK(m.problem == "zdt1");
  CHECK(m.seeds == std::vector<std::uint64_t>{0});

  m = parse_manifest(json::parse(R"({
    "algorithm": "psl", "problem": {"name": "sf"}, "mode": "mofl-baseline",
    "seeds": [1, 2], "budget": {"generations": 3, "batch": 2, "initial": 4},
    "psl": {"steps": 10, "learning_rate": 1e-5},
    "fl": {"clients": 3, "hidden_max": 8, "dataset": {"type": "synthetic", "per_client": 50}},
    "constraints": {"bounds": [null, 0.8, null], "penalties": [0, 20, 0]},
    "reference": [1, 1, 500]})"));
  CHECK(m.baseline);
  CHECK(m.psl.unconstrained_baseline);
  CHECK(m.psl.generations == 3);
  CHECK(m.psl.batch == 2);
  CHECK(m.psl.initial == 4);
  CHECK(m.psl.training.adam.learning_rate == 1e-5);
  CHECK(m.fl.setting == fl::Setting::kSparsification);
  CHECK(m.fl.clients == 3);
  CHECK(std::get<fl::SyntheticSpec>(m.fl.dataset).per_client == 50);
  REQUIRE(m.constraints);
  CHECK_FALSE(m.constraints->bounds[0].has_value());
  CHECK(*m.constraints->bounds[1] == 0.8);

  // The echo parses back to the same echo.
  const json echo = manifest_to_json(m);
  CHECK(manifest_to_json(parse_manifest(echo)) == echo);
  CHECK_FALSE(echo.contains("workers"));
  CHECK_FALSE(echo.contains("output_dir"));
}

TEST_CASE("manifest errors name the field") {
  auto error_of = [](const char* text) {
    try {
      parse_manifest(json::parse(text));
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(error_of(R"({"problem": {"name": "zdt1", "dim": 3}})").find("problem.dim") != std::string::npos);
  CHECK(error_of(R"({"budget": {"population": "big"}})").find("budget.population") != std::string::npos);
  CHECK(error_of(R"({"seeds": []})").find("seeds") != std::string::npos);
  CHECK(error_of(R"({"budget": {"generations": 0}})").find("generations") != std::string::npos);
  CHECK(error_of(R"({"mode": "strict"})").find("mode") != std::string::npos);
  CHECK(error_of(R"({"algorithm": "sa"})").find("algorithm") != std::string::npos);
  CHECK(error_of(R"({"fl": {"dataset": {"type": "csv"}}})").find("fl.dataset.type") != std::string::npos);
  CHECK(error_of(R"({"budget": {"population": 7}})").find("population") != std::string::npos);
}

TEST_CASE("optimize writes one trace row per generation") {
  TempDir tmp("opt");
  auto m = small_nsga2(tmp.path);
  cmd_optimize(m);
  const auto trace = slurp(tmp.path / "trace.csv");
  CHECK(trace.rfind("seed,generation,hv_feasible,hv_all,feasible_count\n", 0) == 0);
  CHECK(count_lines(trace) == 1 + 6);
  CHECK(count_lines(slurp(tmp.path / "summary.csv")) == 1 + 6);
  CHECK(fs::exists(tmp.path / "manifest.json"));
  CHECK_FALSE(fs::exists(tmp.path / "checkpoint_seed3.json"));

  const auto archive = json::parse(slurp(tmp.path / "archive_seed3.json"));
  CHECK(archive.at("schema") == kSchemaVersion);
  CHECK(archive.at("entries").size() == 8);
  for (const auto& e : archive.at("entries")) {
    CHECK(e.at("raw").size() == 2);
    CHECK(e.at("penalized") == e.at("raw"));
  }
  CHECK(archive.at("trace").size() == 6);

  const ReferencePoint z{1.0, 1.0};
  CHECK(hv_from_file(tmp.path / "archive_seed3.json", z).hv ==
        archive.at("trace").back().at("hv_feasible").get<double>());
}

TEST_CASE("artifacts are byte-identical across worker counts") {
  TempDir tmp("det");
  for (const char* algo : {"nsga2", "psl", "random"}) {
    INFO(algo);
    auto m = parse_manifest(json::parse(std::string(R"({"algorithm": ")") + algo + R"(",
      "problem": {"name": "constrained_toy", "dimension": 3}, "seeds": [0, 1, 2],
      "budget": {"generations": 3, "population": 6, "batch": 2, "candidates": 50},
      "psl": {"steps": 20}})"));
    m.output_dir = (tmp.path / (std::string(algo) + "_w1")).string();
    m.workers = 1;
    cmd_optimize(m);
    m.output_dir = (tmp.path / (std::string(algo) + "_w4")).string();
    m.workers = 4;
    cmd_optimize(m);
    expect_same_tree(tmp.path / (std::string(algo) + "_w1"), tmp.path / (std::string(algo) + "_w4"));
  }
}

TEST_CASE("runs resume from a checkpoint and reuse finished seeds") {
  TempDir tmp("resume");
  auto full = small_nsga2(tmp.path / "full");
  cmd_optimize(full);

  // Interrupted after generation 2: the checkpoint of a shorter run.
  auto partial = small_nsga2(tmp.path / "resumed");
  fs::create_directories(partial.output_dir);
  partial.nsga2.generations = 2;
  const auto problem = make_problem(partial);
  const fs::path ckpt = fs::path(partial.output_dir) / "checkpoint_seed3.json";
  run_seed(partial, *problem, 3, 1, ckpt);
  REQUIRE(fs::exists(ckpt));

  auto resumed = small_nsga2(tmp.path / "resumed");
  cmd_optimize(resumed);
  CHECK_FALSE(fs::exists(ckpt));
  expect_same_tree(tmp.path / "full", tmp.path / "resumed");

  // The checkpoint is really used: a marker planted in it survives.
  run_seed(partial, *problem, 3, 1, ckpt);
  auto saved = json::parse(slurp(ckpt));
  saved["state"]["trace"][0]["hv_all"] = 123.0;
  write(ckpt, saved.dump());
  fs::remove(fs::path(resumed.output_dir) / "archive_seed3.json");
  cmd_optimize(resumed);
  CHECK(slurp(fs::path(resumed.output_dir) / "trace.csv").find(",123,") != std::string::npos);

  // Finished seeds are read back rather than rerun.
  const auto before = slurp(fs::path(resumed.output_dir) / "trace.csv");
  cmd_optimize(resumed);
  CHECK(slurp(fs::path(resumed.output_dir) / "trace.csv") == before);

  // A checkpoint from another manifest is refused.
  saved["manifest"]["problem"]["dimension"] = 5;
  write(ckpt, saved.dump());
  fs::remove(fs::path(resumed.output_dir) / "archive_seed3.json");
  CHECK_THROWS_AS(cmd_optimize(resumed), ConfigError);
}

TEST_CASE("benchmark writes both modes and a comparison") {
  TempDir tmp("bench");
  auto m = parse_manifest(json::parse(R"({"problem": {"name": "constrained_toy", "dimension": 3},
    "seeds": [0, 1, 2], "budget": {"generations": 4, "population": 6}})"));
  m.output_dir = tmp.path.string();
  cmd_benchmark(m);
  CHECK(fs::exists(tmp.path / "cmofl" / "trace.csv"));
  CHECK(fs::exists(tmp.path / "mofl-baseline" / "trace.csv"));
  const auto base = json::parse(slurp(tmp.path / "mofl-baseline" / "manifest.json"));
  CHECK(base.at("mode") == "mofl-baseline");
  const auto cmp = slurp(tmp.path / "comparison.csv");
  CHECK(cmp.rfind("generation,cmofl_mean,cmofl_std,cmofl_median,baseline_mean,", 0) == 0);
  CHECK(count_lines(cmp) == 1 + 4);
}

TEST_CASE("hv from files") {
  TempDir tmp("hv");
  write(tmp.path / "front.txt", "f1,f2\n1,2\n2,1\n");
  CHECK(hv_from_file(tmp.path / "front.txt", {3, 3}).hv == 3.0);
  write(tmp.path / "front.json", "[[1, 2], [2, 1]]");
  CHECK(hv_from_file(tmp.path / "front.json", {3, 3}).hv == 3.0);
  write(tmp.path / "empty.json", "[]");
  CHECK(hv_from_file(tmp.path / "empty.json", {3, 3}).hv == 0.0);
  write(tmp.path / "empty.txt", "");
  CHECK(hv_from_file(tmp.path / "empty.txt", {3, 3}).hv == 0.0);

  const auto r = hv_from_file(tmp.path / "front.txt", {1.5, 3});
  CHECK(r.excluded == 1);
  CHECK(r.hv == 0.5);

  // Archives count feasible raw objectives only.
  json archive = {{"entries", json::array()}};
  auto entry = [](std::vector<double> raw, bool feasible) {
    ArchiveEntry e;
    e.raw = raw;
    e.penalized = raw;
    e.feasible = feasible;
    return entry_to_json(e);
  };
  archive["entries"].push_back(entry({1, 2}, true));
  archive["entries"].push_back(entry({2, 1}, true));
  archive["entries"].push_back(entry({0, 0}, false));
  write(tmp.path / "archive.json", archive.dump());
  const auto a = hv_from_file(tmp.path / "archive.json", {3, 3});
  CHECK(a.hv == 3.0);
  CHECK(a.infeasible == 1);

  write(tmp.path / "bad.txt", "1 2\n2 x\n");
  CHECK_THROWS_AS(hv_from_file(tmp.path / "bad.txt", {3, 3}), FormatError);
  write(tmp.path / "short.txt", "1 2 3\n");
  CHECK_THROWS_AS(hv_from_file(tmp.path / "short.txt", {3, 3}), FormatError);
}

TEST_CASE("evaluate prints a deterministic flat record") {
  fl::SettingConfig cfg;
  cfg.setting = fl::Setting::kRandomization;
  cfg.rounds = 2;
  const fl::Assignment values{{"lr", 0.1}, {"sigma_rd", 0.5}, {"c_clip", 2.0}};
  const auto a = cmd_evaluate(cfg, values, 7);
  CHECK(a.dump() == cmd_evaluate(cfg, values, 7).dump());
  for (const char* k : {"utility_loss", "privacy_leakage", "training_cost"}) {
    CHECK(std::isfinite(a.at(k).get<double>()));
  }
  CHECK(a.at("setting") == "rd");

  try {
    cmd_evaluate(cfg, {{"lr", 0.1}, {"sigma_rd", 1.5}, {"c_clip", 2.0}}, 7);
    FAIL("expected a validation error");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sigma_rd") != std::string::npos);
    CHECK(msg.find("[0, 1]") != std::string::npos);
  }
}
