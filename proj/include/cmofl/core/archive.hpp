#pragma once

#include <cstdint>
#include <vector>

#include "cmofl/core/hypervolume.hpp"
#include "cmofl/core/objectives.hpp"

namespace cmofl {

struct ArchiveEntry {
  std::uint64_t id = 0;          // unique within one run
  std::size_t generation = 0;    // generation in which it was evaluated
  std::vector<double> genes;     // chromosome as the optimizer sees it
  std::vector<double> solution;  // decoded point in [0,1]^d
  ObjectiveVector raw;
  ObjectiveVector penalized;
  bool feasible = false;
};

struct Archive {
  std::vector<ArchiveEntry> entries;
  std::size_t generation = 0;

  std::vector<ObjectiveVector> raw_objectives(bool feasible_only) const;
  std::vector<ObjectiveVector> penalized_objectives() const;
  std::size_t feasible_count() const;
};

// Builds an entry from raw objectives: fills penalized values and the
// feasibility flag from `constraints`.
ArchiveEntry make_entry(std::uint64_t id, std::size_t generation,
                        std::vector<double> genes, std::vector<double> solution,
                        ObjectiveVector raw, const ConstraintSpec& constraints);

// One line of the per-generation trace.
struct GenerationRecord {
  std::size_t generation = 0;
  double hv_feasible = 0.0;  // HV of feasible raw objectives
  double hv_all = 0.0;       // HV of all raw objectives
  std::size_t feasible_count = 0;
  std::vector<double> best;  // per-objective minimum over feasible raw values (empty if none)
};

GenerationRecord summarize_generation(std::size_t generation,
                                      const std::vector<ArchiveEntry>& entries,
                                      const ReferencePoint& reference);

// Keeps the entries that are non-dominated (by raw objectives) among all
// entries seen, or among the feasible ones. Enough to recover the HV and
// per-objective best of everything ever evaluated.
void merge_elite(std::vector<ArchiveEntry>& elite, const std::vector<ArchiveEntry>& fresh);

}  // namespace cmofl
