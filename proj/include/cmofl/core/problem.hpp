#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cmofl/core/hypervolume.hpp"
#include "cmofl/core/objectives.hpp"

namespace cmofl {

// Black-box objective function over [0,1]^d. `seed` drives any stochasticity
// inside one evaluation; implementations must be safe to call concurrently.
using Evaluator =
    std::function<ObjectiveVector(std::span<const double> x, std::uint64_t seed)>;

// Anything the optimizers can be pointed at: analytic benchmarks and the
// federated-learning settings share this seam.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::size_t objective_count() const = 0;
  virtual std::vector<std::string> objective_names() const;
  virtual ObjectiveVector evaluate(std::span<const double> x,
                                   std::uint64_t seed) const = 0;
  virtual ConstraintSpec default_constraints() const;
  virtual ReferencePoint default_reference() const = 0;

  Evaluator evaluator() const;
};

// Evaluates xs[i] with seeds[i] on `workers` threads. Evaluator exceptions
// and non-finite outputs surface as EvaluationError naming the solution.
std::vector<ObjectiveVector> evaluate_batch(const Evaluator& evaluator,
                                            const std::vector<std::vector<double>>& xs,
                                            const std::vector<std::uint64_t>& seeds,
                                            std::size_t expected_m,
                                            std::size_t workers);

}  // namespace cmofl
