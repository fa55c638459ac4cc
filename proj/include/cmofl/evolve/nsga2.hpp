#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cmofl/core/archive.hpp"
#include "cmofl/core/problem.hpp"
#include "cmofl/evolve/operators.hpp"

namespace cmofl::evolve {

enum class Chromosome { kReal, kBinary };

struct GAConfig {
  std::size_t population = 20;  // N, even
  std::size_t generations = 20;  // T
  SbxParams sbx{};
  double mutation_eta = 20.0;   // n_m
  double mutation_rate = 0.1;   // per-gene probability
  Chromosome chromosome = Chromosome::kReal;
  BinaryVariationParams binary{};
  std::size_t bits_per_variable = 10;
  // MOFL-NSGA-II: same engine with every penalty coefficient forced to 0.
  bool unconstrained_baseline = false;

  void validate() const;
};

// Everything needed to resume a run after generation `generation`.
struct Nsga2State {
  std::size_t generation = 0;
  std::vector<ArchiveEntry> population;
  std::vector<std::size_t> rank;
  std::vector<double> crowding;
  std::string rng_state;
  std::uint64_t next_id = 0;
  std::vector<GenerationRecord> trace;
  // Non-dominated entries over every evaluation so far (see merge_elite).
  std::vector<ArchiveEntry> elite;
  std::size_t feasible_evaluations = 0;
};

struct Nsga2Options {
  std::size_t dimension = 0;
  std::size_t objectives = 0;
  ReferencePoint reference;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  // Called after the initial population and after every generation.
  std::function<void(const Nsga2State&)> on_generation;
  std::optional<Nsga2State> resume;
};

struct Nsga2Result {
  Archive archive;  // final population X_T
  // Generations 1..T, each over every solution evaluated up to then.
  std::vector<GenerationRecord> trace;
  std::vector<ArchiveEntry> elite;
};

// Survivor selection over penalized objectives: indices of the best `n`
// under (rank, -crowding, index) order, with the rank and crowding of every
// input.
struct Selection {
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> rank;
  std::vector<double> crowding;
};
Selection select_survivors(const std::vector<ObjectiveVector>& penalized, std::size_t n);

// Constrained NSGA-II: variation, merged re-evaluation, penalty, sorting and
// elitist truncation, once per generation.
Nsga2Result run_nsga2(const GAConfig& cfg, const ConstraintSpec& constraints,
                      const Evaluator& evaluator, const Nsga2Options& options);

}  // namespace cmofl::evolve
