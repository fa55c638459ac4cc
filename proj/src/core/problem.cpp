#include "cmofl/core/problem.hpp"

#include <cmath>
#include <sstream>

#include "cmofl/core/errors.hpp"
#include "cmofl/core/parallel.hpp"

namespace cmofl {

std::vector<std::string> Problem::objective_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < objective_count(); ++i) {
    names.push_back("f" + std::to_string(i + 1));
  }
  return names;
}

ConstraintSpec Problem::default_constraints() const {
  return ConstraintSpec::unconstrained(objective_count());
}

Evaluator Problem::evaluator() const {
  return [this](std::span<const double> x, std::uint64_t seed) {
    return evaluate(x, seed);
  };
}

std::vector<ObjectiveVector> evaluate_batch(const Evaluator& evaluator,
                                            const std::vector<std::vector<double>>& xs,
                                            const std::vector<std::uint64_t>& seeds,
                                            std::size_t expected_m,
                                            std::size_t workers) {
  if (xs.size() != seeds.size()) throw InvalidInput("evaluate_batch: seed count mismatch");
  std::vector<ObjectiveVector> out(xs.size());
  parallel_for(xs.size(), workers, [&](std::size_t i) {
    ObjectiveVector y;
    try {
      y = evaluator(xs[i], seeds[i]);
    } catch (const std::exception& e) {
      throw EvaluationError(std::string("evaluation failed: ") + e.what(), xs[i]);
    }
    if (y.size() != expected_m) {
      throw EvaluationError("evaluator returned " + std::to_string(y.size()) +
                                " objectives, expected " + std::to_string(expected_m),
                            xs[i]);
    }
    for (double v : y) {
      if (!std::isfinite(v)) throw EvaluationError("evaluator returned a non-finite objective", xs[i]);
    }
    out[i] = std::move(y);
  });
  return out;
}

}  // namespace cmofl
