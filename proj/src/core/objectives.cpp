#include "cmofl/core/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cmofl/core/errors.hpp"

namespace cmofl {

ConstraintSpec ConstraintSpec::unconstrained(std::size_t m) {
  return ConstraintSpec{std::vector<std::optional<double>>(m),
                        std::vector<double>(m, 0.0)};
}

bool ConstraintSpec::feasible(std::span<const double> y) const {
  if (y.size() != bounds.size()) {
    throw InvalidInput("feasible: objective/constraint dimension mismatch");
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (bounds[i] && y[i] > *bounds[i]) return false;
  }
  return true;
}

ConstraintSpec ConstraintSpec::without_penalties() const {
  ConstraintSpec out = *this;
  std::fill(out.penalties.begin(), out.penalties.end(), 0.0);
  return out;
}

void ConstraintSpec::validate(std::size_t m) const {
  if (bounds.size() != m || penalties.size() != m) {
    throw InvalidInput("constraint spec has " + std::to_string(bounds.size()) +
                       " bounds and " + std::to_string(penalties.size()) +
                       " penalties, expected " + std::to_string(m));
  }
  for (double a : penalties) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw InvalidInput("penalty coefficients must be finite and >= 0");
    }
  }
}

bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw InvalidInput("dominates: dimension mismatch (" +
                       std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()) + ")");
  }
  bool strictly_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly_better = true;
  }
  return strictly_better;
}

std::vector<std::vector<std::size_t>> nondominated_sort(
    const std::vector<ObjectiveVector>& vs) {
  if (vs.empty()) throw InvalidInput("nondominated_sort: empty input");
  const std::size_t m = vs.front().size();
  for (const auto& v : vs) {
    if (v.size() != m) throw InvalidInput("nondominated_sort: dimension mismatch");
  }

  const std::size_t n = vs.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> domination_count(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (dominates(vs[p], vs[q])) {
        dominated_by_me[p].push_back(q);
        ++domination_count[q];
      } else if (dominates(vs[q], vs[p])) {
        dominated_by_me[q].push_back(p);
        ++domination_count[p];
      }
    }
  }

  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    if (domination_count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated_by_me[p]) {
        if (--domination_count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front) {
  const std::size_t n = front.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (n == 0) throw InvalidInput("crowding_distance: empty front");
  if (n <= 2) return std::vector<double>(n, kInf);

  const std::size_t m = front.front().size();
  std::vector<double> distance(n, 0.0);
  std::vector<std::size_t> order(n);
  for (std::size_t obj = 0; obj < m; ++obj) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return front[a][obj] < front[b][obj];
    });
    const double lo = front[order.front()][obj];
    const double hi = front[order.back()][obj];
    const double range = hi - lo;
    if (!(range > 0.0)) continue;
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    for (std::size_t r = 1; r + 1 < n; ++r) {
      const std::size_t i = order[r];
      if (std::isinf(distance[i])) continue;
      distance[i] += (front[order[r + 1]][obj] - front[order[r - 1]][obj]) / range;
    }
  }
  return distance;
}

ObjectiveVector penalize(std::span<const double> y, const ConstraintSpec& c) {
  if (y.size() != c.bounds.size() || y.size() != c.penalties.size()) {
    throw InvalidInput("penalize: objective/constraint dimension mismatch");
  }
  ObjectiveVector out(y.begin(), y.end());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!c.bounds[i]) continue;
    out[i] = y[i] + c.penalties[i] * std::max(0.0, y[i] - *c.bounds[i]);
  }
  return out;
}

double aggregate_objective(std::span<const double> locals,
                           std::span<const double> weights,
                           AggregationMode mode) {
  if (locals.empty()) throw InvalidInput("aggregate_objective: no local values");
  if (mode == AggregationMode::kWorst) {
    return *std::max_element(locals.begin(), locals.end());
  }
  if (weights.size() != locals.size()) {
    throw InvalidInput("aggregate_objective: weight count mismatch");
  }
  double wsum = 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < locals.size(); ++k) {
    if (weights[k] < 0.0) throw InvalidInput("aggregate_objective: negative weight");
    wsum += weights[k];
    acc += weights[k] * locals[k];
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw InvalidInput("aggregate_objective: weights sum to " +
                       std::to_string(wsum) + ", expected 1");
  }
  return acc;
}

}  // namespace cmofl
