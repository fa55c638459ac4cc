#include "cmofl/bench/problems.hpp"

#include <cmath>
#include <string>

#include "cmofl/core/errors.hpp"
#include "cmofl/core/rng.hpp"

namespace cmofl::bench {
namespace {

void require_box(std::span<const double> x, std::size_t min_dim, const char* name) {
  if (x.size() < min_dim) {
    throw InvalidInput(std::string(name) + ": dimension must be >= " + std::to_string(min_dim));
  }
  for (double v : x) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidInput(std::string(name) + ": input outside [0,1]^d");
    }
  }
}

}  // namespace

ObjectiveVector zdt1(std::span<const double> x) {
  require_box(x, 2, "zdt1");
  const double f1 = x[0];
  double tail = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) tail += x[i];
  const double g = 1.0 + 9.0 * tail / static_cast<double>(x.size() - 1);
  return {f1, g * (1.0 - std::sqrt(f1 / g))};
}

ObjectiveVector constrained_toy(std::span<const double> x) {
  require_box(x, 2, "constrained_toy");
  double spread = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) spread += (x[i] - 0.5) * (x[i] - 0.5);
  spread /= static_cast<double>(x.size() - 1);
  return {x[0] * x[0] + spread, 1.0 - x[0]};
}

ConstraintSpec constrained_toy_constraints() {
  return ConstraintSpec{{std::nullopt, 0.8}, {0.0, 20.0}};
}

BenchmarkProblem::BenchmarkProblem(std::string name, std::size_t dimension,
                                   std::size_t objectives, Function f,
                                   ReferencePoint reference,
                                   std::optional<ConstraintSpec> constraints,
                                   FrontCurve front)
    : name_(std::move(name)),
      dimension_(dimension),
      objectives_(objectives),
      f_(std::move(f)),
      reference_(std::move(reference)),
      constraints_(std::move(constraints)),
      front_(std::move(front)) {
  if (reference_.size() != objectives_) throw InvalidInput("reference point dimension mismatch");
  if (constraints_) constraints_->validate(objectives_);
}

ObjectiveVector BenchmarkProblem::evaluate(std::span<const double> x, std::uint64_t) const {
  if (x.size() != dimension_) throw InvalidInput(name_ + ": wrong solution dimension");
  return f_(x);
}

ConstraintSpec BenchmarkProblem::default_constraints() const {
  return constraints_ ? *constraints_ : ConstraintSpec::unconstrained(objectives_);
}

BenchmarkProblem make_zdt1(std::size_t dimension) {
  if (dimension < 2) throw InvalidInput("zdt1: dimension must be >= 2");
  return BenchmarkProblem("zdt1", dimension, 2, zdt1, {1.0, 1.0}, std::nullopt,
                          [](double f1) { return 1.0 - std::sqrt(f1); });
}

BenchmarkProblem make_constrained_toy(std::size_t dimension) {
  if (dimension < 2) throw InvalidInput("constrained_toy: dimension must be >= 2");
  // Front: u = (1 - p)^2, i.e. as a curve over f1 = u: p = 1 - sqrt(u).
  return BenchmarkProblem("constrained_toy", dimension, 2, constrained_toy, {1.0, 1.0},
                          constrained_toy_constraints(),
                          [](double u) { return 1.0 - std::sqrt(u); });
}

std::vector<ObjectiveVector> brute_force_front(const Problem& problem, const GridSpec& grid) {
  const std::size_t d = problem.dimension();
  const std::size_t axes = d <= 3 ? d : std::min(grid.gridded_axes, d);
  if (grid.resolution == 0) throw InvalidInput("brute_force_front: resolution must be >= 1");
  double total = 1.0;
  for (std::size_t a = 0; a < axes; ++a) total *= static_cast<double>(grid.resolution);
  if (total > 1e7) {
    throw ResourceError("brute_force_front: grid of " + std::to_string(total) +
                        " points exceeds the 1e7 limit");
  }
  const auto count = static_cast<std::size_t>(total);
  const ConstraintSpec constraints = problem.default_constraints();

  std::vector<ObjectiveVector> ys;
  ys.reserve(count);
  std::vector<double> x(d, grid.fixed_value);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    for (std::size_t a = 0; a < axes; ++a) {
      const std::size_t step = rest % grid.resolution;
      rest /= grid.resolution;
      x[a] = grid.resolution == 1
                 ? grid.fixed_value
                 : static_cast<double>(step) / static_cast<double>(grid.resolution - 1);
    }
    auto y = problem.evaluate(x, 0);
    if (grid.feasible_only && !constraints.feasible(y)) continue;
    ys.push_back(std::move(y));
  }

  std::vector<ObjectiveVector> front;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < ys.size() && !dominated; ++j) {
      dominated = (j != i) && dominates(ys[j], ys[i]);
    }
    if (!dominated) front.push_back(ys[i]);
  }
  return front;
}

RandomSearchResult run_random_search(const RandomSearchConfig& cfg,
                                     const ConstraintSpec& constraints,
                                     const Evaluator& evaluator,
                                     const RandomSearchOptions& opt) {
  constraints.validate(opt.objectives);
  if (opt.dimension == 0) throw InvalidInput("run_random_search: dimension must be positive");
  if (cfg.batch == 0) throw ConfigError("random search: batch must be >= 1");
  RandomSearchState state;
  Rng rng;

  auto add = [&](const std::vector<std::vector<double>>& xs, std::size_t generation) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < xs.size(); ++i) seeds.push_back(derive_seed(opt.seed, {generation, i}));
    auto ys = evaluate_batch(evaluator, xs, seeds, opt.objectives, opt.workers);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      state.archive.entries.push_back(
          make_entry(state.next_id++, generation, xs[i], xs[i], std::move(ys[i]), constraints));
    }
  };

  if (opt.resume) {
    state = *opt.resume;
    rng = load_rng_state(state.rng_state);
  } else {
    rng = make_rng(opt.seed, {0x52414e44});
    add(latin_hypercube(cfg.initial, opt.dimension, rng), 0);
    state.rng_state = save_rng_state(rng);
    if (opt.on_generation) opt.on_generation(state);
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t t = state.generation + 1; t <= cfg.generations; ++t) {
    std::vector<std::vector<double>> xs(cfg.batch, std::vector<double>(opt.dimension));
    for (auto& x : xs) {
      for (auto& v : x) v = unif(rng);
    }
    add(xs, t);
    state.generation = t;
    state.archive.generation = t;
    state.trace.push_back(summarize_generation(t, state.archive.entries, opt.reference));
    state.rng_state = save_rng_state(rng);
    if (opt.on_generation) opt.on_generation(state);
  }
  return {state.archive, state.trace};
}

}  // namespace cmofl::bench
