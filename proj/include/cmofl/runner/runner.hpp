#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "cmofl/core/archive.hpp"
#include "cmofl/core/problem.hpp"
#include "cmofl/fl/settings.hpp"
#include "cmofl/runner/manifest.hpp"

namespace cmofl::runner {

std::unique_ptr<Problem> make_problem(const RunManifest& m);

// Constraints and reference the run uses: manifest overrides, else the
// problem's defaults.
ConstraintSpec run_constraints(const RunManifest& m, const Problem& p);
ReferencePoint run_reference(const RunManifest& m, const Problem& p);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<GenerationRecord> trace;
  std::vector<ArchiveEntry> entries;  // final population (nsga2) or every evaluation
  std::vector<ArchiveEntry> elite;    // nsga2 only
};

// One optimizer run. With a non-empty `checkpoint` path the state is saved
// after every generation and a matching checkpoint is resumed from.
SeedRun run_seed(const RunManifest& m, const Problem& problem, std::uint64_t seed,
                 std::size_t workers, const std::filesystem::path& checkpoint = {});

struct SummaryRow {
  std::size_t generation = 0;
  double mean = 0.0;  // feasible HV across seeds
  double std = 0.0;   // sample standard deviation, 0 for one seed
  double median = 0.0;
};
std::vector<SummaryRow> summarize(const std::vector<SeedRun>& runs);

// Runs every seed and writes manifest.json, trace.csv, summary.csv and
// archive_seed<N>.json under m.output_dir. Completed seeds found on disk
// are reused; interrupted ones resume from their checkpoint.
std::vector<SeedRun> cmd_optimize(const RunManifest& m);

// The manifest once as cmofl and once as mofl-baseline, in <out>/cmofl and
// <out>/mofl-baseline, plus <out>/comparison.csv.
void cmd_benchmark(const RunManifest& m);

struct HvReport {
  double hv = 0.0;
  std::size_t points = 0;     // feasible points considered
  std::size_t excluded = 0;   // points outside the reference box
  std::size_t infeasible = 0; // archive entries skipped as infeasible
};
// Archive JSON (feasible raw objectives of entries and elite), a JSON list of
// objective vectors, or whitespace/comma separated text rows.
HvReport hv_from_file(const std::filesystem::path& path, const ReferencePoint& reference);

// One FLO run at explicit hyperparameter values, as a flat JSON record.
nlohmann::json cmd_evaluate(const fl::SettingConfig& cfg, const fl::Assignment& values,
                            std::uint64_t seed);

nlohmann::json entry_to_json(const ArchiveEntry& e);
ArchiveEntry entry_from_json(const nlohmann::json& j);

}  // namespace cmofl::runner
