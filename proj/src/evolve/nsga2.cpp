#include "cmofl/evolve/nsga2.hpp"

#include <algorithm>
#include <numeric>

#include "cmofl/core/errors.hpp"

namespace cmofl::evolve {
namespace {

constexpr std::uint64_t kEvalStream = 0x45564131;  // evaluation sub-seeds
constexpr std::uint64_t kInitStream = 0x494e4954;

bool ranks_before(std::size_t a, std::size_t b, const std::vector<std::size_t>& rank,
                  const std::vector<double>& crowding) {
  if (rank[a] != rank[b]) return rank[a] < rank[b];
  if (crowding[a] != crowding[b]) return crowding[a] > crowding[b];
  return a < b;
}

std::vector<double> decode(const GAConfig& cfg, const std::vector<double>& genes) {
  if (cfg.chromosome == Chromosome::kBinary) return decode_binary(genes, cfg.bits_per_variable);
  return genes;
}

std::vector<ArchiveEntry> evaluate_population(const std::vector<std::vector<double>>& genes,
                                              const GAConfig& cfg,
                                              const ConstraintSpec& constraints,
                                              const Evaluator& evaluator,
                                              const Nsga2Options& opt, std::size_t generation,
                                              std::uint64_t& next_id) {
  std::vector<std::vector<double>> xs;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < genes.size(); ++i) {
    xs.push_back(decode(cfg, genes[i]));
    seeds.push_back(derive_seed(opt.seed, {kEvalStream, generation, i}));
  }
  auto ys = evaluate_batch(evaluator, xs, seeds, opt.objectives, opt.workers);
  std::vector<ArchiveEntry> out;
  out.reserve(genes.size());
  for (std::size_t i = 0; i < genes.size(); ++i) {
    out.push_back(make_entry(next_id++, generation, genes[i], xs[i], std::move(ys[i]),
                             constraints));
  }
  return out;
}

std::vector<std::vector<double>> make_offspring(const Nsga2State& state, const GAConfig& cfg,
                                                Rng& rng) {
  const std::size_t n = state.population.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  auto tournament = [&]() -> const std::vector<double>& {
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    return state.population[ranks_before(a, b, state.rank, state.crowding) ? a : b].genes;
  };
  std::vector<std::vector<double>> kids;
  kids.reserve(n);
  while (kids.size() < n) {
    const auto& p1 = tournament();
    const auto& p2 = tournament();
    GenePair pair;
    if (cfg.chromosome == Chromosome::kBinary) {
      pair = binary_variation(p1, p2, cfg.binary, rng);
    } else {
      pair = sbx_crossover(p1, p2, cfg.sbx, rng);
      pair.first = polynomial_mutation(pair.first, cfg.mutation_eta, cfg.mutation_rate, rng);
      pair.second = polynomial_mutation(pair.second, cfg.mutation_eta, cfg.mutation_rate, rng);
    }
    kids.push_back(std::move(pair.first));
    if (kids.size() < n) kids.push_back(std::move(pair.second));
  }
  return kids;
}

}  // namespace

void GAConfig::validate() const {
  if (population < 2 || population % 2 != 0) {
    throw InvalidInput("population size must be even and >= 2");
  }
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(sbx.probability) || !prob(sbx.gene_probability) || !prob(mutation_rate) ||
      !prob(binary.crossover_probability) || !prob(binary.flip_probability)) {
    throw InvalidInput("operator probabilities must lie in [0,1]");
  }
  if (sbx.eta < 0.0 || mutation_eta < 0.0) throw InvalidInput("distribution indices must be >= 0");
  if (chromosome == Chromosome::kBinary && (bits_per_variable == 0 || bits_per_variable > 52)) {
    throw InvalidInput("bits_per_variable must lie in [1,52]");
  }
}

Selection select_survivors(const std::vector<ObjectiveVector>& penalized, std::size_t n) {
  Selection sel;
  const std::size_t total = penalized.size();
  sel.rank.assign(total, 0);
  sel.crowding.assign(total, 0.0);
  if (total == 0) return sel;
  const auto fronts = nondominated_sort(penalized);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    std::vector<ObjectiveVector> members;
    for (std::size_t i : fronts[f]) members.push_back(penalized[i]);
    const auto dist = crowding_distance(members);
    for (std::size_t j = 0; j < fronts[f].size(); ++j) {
      sel.rank[fronts[f][j]] = f;
      sel.crowding[fronts[f][j]] = dist[j];
    }
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranks_before(a, b, sel.rank, sel.crowding);
  });
  order.resize(std::min(n, total));
  sel.chosen = std::move(order);
  return sel;
}

Nsga2Result run_nsga2(const GAConfig& cfg, const ConstraintSpec& constraints_in,
                      const Evaluator& evaluator, const Nsga2Options& opt) {
  cfg.validate();
  if (opt.dimension == 0) throw InvalidInput("run_nsga2: dimension must be positive");
  constraints_in.validate(opt.objectives);
  const ConstraintSpec constraints =
      cfg.unconstrained_baseline ? constraints_in.without_penalties() : constraints_in;
  const std::size_t n = cfg.population;
  const std::size_t gene_count =
      cfg.chromosome == Chromosome::kBinary ? opt.dimension * cfg.bits_per_variable : opt.dimension;

  Nsga2State state;
  Rng rng;
  if (opt.resume) {
    state = *opt.resume;
    rng = load_rng_state(state.rng_state);
  } else {
    rng = make_rng(opt.seed, {kInitStream});
    std::vector<std::vector<double>> genes;
    if (cfg.chromosome == Chromosome::kBinary) {
      std::bernoulli_distribution coin(0.5);
      genes.assign(n, std::vector<double>(gene_count));
      for (auto& g : genes) {
        for (auto& b : g) b = coin(rng) ? 1.0 : 0.0;
      }
    } else {
      genes = latin_hypercube(n, gene_count, rng);
    }
    state.population = evaluate_population(genes, cfg, constraints, evaluator, opt, 0,
                                           state.next_id);
    auto sel = select_survivors(
        [&] {
          std::vector<ObjectiveVector> ys;
          for (const auto& e : state.population) ys.push_back(e.penalized);
          return ys;
        }(),
        n);
    state.rank = sel.rank;
    state.crowding = sel.crowding;
    merge_elite(state.elite, state.population);
    for (const auto& e : state.population) state.feasible_evaluations += e.feasible;
    state.rng_state = save_rng_state(rng);
    if (opt.on_generation) opt.on_generation(state);
  }

  for (std::size_t t = state.generation + 1; t <= cfg.generations; ++t) {
    // R = X_{t-1} + offspring; parents come first so insertion order breaks ties.
    std::vector<std::vector<double>> genes;
    for (const auto& e : state.population) genes.push_back(e.genes);
    for (auto& g : make_offspring(state, cfg, rng)) genes.push_back(std::move(g));
    auto merged = evaluate_population(genes, cfg, constraints, evaluator, opt, t, state.next_id);

    std::vector<ObjectiveVector> ys;
    for (const auto& e : merged) ys.push_back(e.penalized);
    const auto sel = select_survivors(ys, n);

    Nsga2State next;
    next.generation = t;
    next.next_id = state.next_id;
    for (std::size_t i : sel.chosen) {
      next.population.push_back(merged[i]);
      next.rank.push_back(sel.rank[i]);
      next.crowding.push_back(sel.crowding[i]);
    }
    next.elite = std::move(state.elite);
    merge_elite(next.elite, merged);
    next.feasible_evaluations = state.feasible_evaluations;
    for (const auto& e : merged) next.feasible_evaluations += e.feasible;
    next.trace = std::move(state.trace);
    auto record = summarize_generation(t, next.elite, opt.reference);
    record.feasible_count = next.feasible_evaluations;
    next.trace.push_back(std::move(record));
    next.rng_state = save_rng_state(rng);
    state = std::move(next);
    if (opt.on_generation) opt.on_generation(state);
  }

  Nsga2Result result;
  result.archive.entries = state.population;
  result.archive.generation = state.generation;
  result.trace = state.trace;
  result.elite = state.elite;
  return result;
}

}  // namespace cmofl::evolve
