#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cmofl/bench/problems.hpp"
#include "cmofl/evolve/nsga2.hpp"
#include "cmofl/fl/settings.hpp"
#include "cmofl/psl/psl.hpp"

namespace cmofl::runner {

enum class Algorithm { kNsga2, kPsl, kRandom };

std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

inline constexpr const char* kSchemaVersion = "cmofl-artifacts/1";

// One experiment: an optimizer pointed at a problem, repeated over seeds.
struct RunManifest {
  Algorithm algorithm = Algorithm::kNsga2;
  std::string problem = "zdt1";  // zdt1 | constrained_toy | rd | bc | sf
  std::size_t dimension = 10;    // benchmark problems only
  bool baseline = false;         // mofl-baseline: every alpha forced to 0
  std::vector<std::uint64_t> seeds{0};

  evolve::GAConfig nsga2{};
  psl::PslConfig psl{};
  bench::RandomSearchConfig random{};
  fl::SettingConfig fl{};

  std::optional<ConstraintSpec> constraints;
  std::optional<ReferencePoint> reference;

  // Execution only; never part of the echoed manifest.
  std::string output_dir = "cmofl-out";
  std::size_t workers = 1;

  bool is_fl() const { return problem == "rd" || problem == "bc" || problem == "sf"; }
  void validate() const;
};

// Missing keys keep their defaults; unknown keys and wrong types raise
// ConfigError naming the full key path.
RunManifest parse_manifest(const nlohmann::json& j);
RunManifest load_manifest(const std::string& path);

// Canonical echo of everything that determines results.
nlohmann::json manifest_to_json(const RunManifest& m);

}  // namespace cmofl::runner
