#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmofl/core/archive.hpp"
#include "cmofl/core/problem.hpp"

namespace cmofl::bench {

// ZDT1 on [0,1]^d, d >= 2. Front: f2 = 1 - sqrt(f1) for x_2..x_d = 0.
ObjectiveVector zdt1(std::span<const double> x);

// Constrained toy with a utility-like convex quadratic and a synthetic
// privacy objective p(x) = 1 - x1, bounded by p <= 0.8 (alpha = 20).
//   u(x) = x1^2 + mean_{i>=2} (x_i - 0.5)^2
ObjectiveVector constrained_toy(std::span<const double> x);
ConstraintSpec constrained_toy_constraints();

// Analytic problem behind the shared Problem seam.
class BenchmarkProblem : public Problem {
 public:
  using Function = std::function<ObjectiveVector(std::span<const double>)>;
  // Known front as f_m = front(f_1) for bi-objective problems.
  using FrontCurve = std::function<double(double)>;

  BenchmarkProblem(std::string name, std::size_t dimension, std::size_t objectives,
                   Function f, ReferencePoint reference,
                   std::optional<ConstraintSpec> constraints = std::nullopt,
                   FrontCurve front = nullptr);

  std::string name() const override { return name_; }
  std::size_t dimension() const override { return dimension_; }
  std::size_t objective_count() const override { return objectives_; }
  ObjectiveVector evaluate(std::span<const double> x, std::uint64_t seed) const override;
  ConstraintSpec default_constraints() const override;
  ReferencePoint default_reference() const override { return reference_; }
  const FrontCurve& front_curve() const { return front_; }

 private:
  std::string name_;
  std::size_t dimension_;
  std::size_t objectives_;
  Function f_;
  ReferencePoint reference_;
  std::optional<ConstraintSpec> constraints_;
  FrontCurve front_;
};

BenchmarkProblem make_zdt1(std::size_t dimension);
BenchmarkProblem make_constrained_toy(std::size_t dimension);

struct GridSpec {
  std::size_t resolution = 101;  // points per gridded axis
  // Axes gridded when d > 3; the rest stay at `fixed_value`.
  std::size_t gridded_axes = 2;
  double fixed_value = 0.0;
  bool feasible_only = false;
};

// Evaluates a full (d <= 3) or coordinate-restricted grid and returns its
// non-dominated subset via a quadratic pairwise filter.
std::vector<ObjectiveVector> brute_force_front(const Problem& problem, const GridSpec& grid);

struct RandomSearchConfig {
  std::size_t initial = 5;
  std::size_t generations = 20;
  std::size_t batch = 5;
};

struct RandomSearchState {
  std::size_t generation = 0;
  Archive archive;
  std::string rng_state;
  std::uint64_t next_id = 0;
  std::vector<GenerationRecord> trace;
};

struct RandomSearchOptions {
  std::size_t dimension = 0;
  std::size_t objectives = 0;
  ReferencePoint reference;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::function<void(const RandomSearchState&)> on_generation;
  std::optional<RandomSearchState> resume;
};

struct RandomSearchResult {
  Archive archive;
  std::vector<GenerationRecord> trace;
};

// Uniform random sampling with the same budget layout as PSL: a Latin
// hypercube initial design, then `batch` uniform points per generation.
RandomSearchResult run_random_search(const RandomSearchConfig& cfg,
                                     const ConstraintSpec& constraints,
                                     const Evaluator& evaluator,
                                     const RandomSearchOptions& options);

}  // namespace cmofl::bench
