#include "cmofl/core/archive.hpp"

#include <algorithm>

namespace cmofl {

std::vector<ObjectiveVector> Archive::raw_objectives(bool feasible_only) const {
  std::vector<ObjectiveVector> out;
  for (const auto& e : entries) {
    if (!feasible_only || e.feasible) out.push_back(e.raw);
  }
  return out;
}

std::vector<ObjectiveVector> Archive::penalized_objectives() const {
  std::vector<ObjectiveVector> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.penalized);
  return out;
}

std::size_t Archive::feasible_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.feasible; }));
}

ArchiveEntry make_entry(std::uint64_t id, std::size_t generation,
                        std::vector<double> genes, std::vector<double> solution,
                        ObjectiveVector raw, const ConstraintSpec& constraints) {
  ArchiveEntry e;
  e.id = id;
  e.generation = generation;
  e.genes = std::move(genes);
  e.solution = std::move(solution);
  e.penalized = penalize(raw, constraints);
  e.feasible = constraints.feasible(raw);
  e.raw = std::move(raw);
  return e;
}

GenerationRecord summarize_generation(std::size_t generation,
                                      const std::vector<ArchiveEntry>& entries,
                                      const ReferencePoint& reference) {
  GenerationRecord rec;
  rec.generation = generation;
  std::vector<ObjectiveVector> all;
  std::vector<ObjectiveVector> feasible;
  for (const auto& e : entries) {
    all.push_back(e.raw);
    if (e.feasible) feasible.push_back(e.raw);
  }
  rec.hv_all = hypervolume(all, reference);
  rec.hv_feasible = hypervolume(feasible, reference);
  rec.feasible_count = feasible.size();
  if (!feasible.empty()) {
    rec.best = feasible.front();
    for (const auto& y : feasible) {
      for (std::size_t i = 0; i < y.size(); ++i) rec.best[i] = std::min(rec.best[i], y[i]);
    }
  }
  return rec;
}

void merge_elite(std::vector<ArchiveEntry>& elite, const std::vector<ArchiveEntry>& fresh) {
  std::vector<ArchiveEntry> pool = std::move(elite);
  pool.insert(pool.end(), fresh.begin(), fresh.end());
  auto beaten = [&](std::size_t i, bool feasible_only) {
    for (std::size_t j = 0; j < pool.size(); ++j) {
      if (j == i || (feasible_only && !pool[j].feasible)) continue;
      if (dominates(pool[j].raw, pool[i].raw)) return true;
      if (j < i && pool[j].raw == pool[i].raw && pool[j].feasible == pool[i].feasible) return true;
    }
    return false;
  };
  elite.clear();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!beaten(i, false) || (pool[i].feasible && !beaten(i, true))) elite.push_back(pool[i]);
  }
}

}  // namespace cmofl
