#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cmofl {

// Objective values of one solution, minimization convention.
using ObjectiveVector = std::vector<double>;

// Per-objective upper bounds phi_i and penalty coefficients alpha_i.
// Objectives without a bound are unconstrained and never penalized.
struct ConstraintSpec {
  std::vector<std::optional<double>> bounds;
  std::vector<double> penalties;

  static ConstraintSpec unconstrained(std::size_t m);

  std::size_t size() const { return bounds.size(); }
  bool feasible(std::span<const double> y) const;
  // Same bounds with every alpha set to zero (the MOFL baseline).
  ConstraintSpec without_penalties() const;
  void validate(std::size_t m) const;
};

enum class AggregationMode { kAverage, kWorst };

// a dominates b: no worse everywhere and strictly better somewhere.
bool dominates(std::span<const double> a, std::span<const double> b);

// Fast non-dominated sort. Returns fronts as index lists into `vs`, front 0
// first; indices inside a front are ascending.
std::vector<std::vector<std::size_t>> nondominated_sort(
    const std::vector<ObjectiveVector>& vs);

// Crowding distance of each member of one front. Boundary points get
// +infinity; an objective with zero range on the front contributes 0.
std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front);

// y_i + alpha_i * max(0, y_i - phi_i) on every constrained coordinate.
ObjectiveVector penalize(std::span<const double> y, const ConstraintSpec& c);

// Weighted mean (average case) or maximum (worst case) of per-client values.
double aggregate_objective(std::span<const double> locals,
                           std::span<const double> weights,
                           AggregationMode mode);

}  // namespace cmofl
