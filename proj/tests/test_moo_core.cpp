#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "cmofl/core/errors.hpp"
#include "cmofl/core/hypervolume.hpp"
#include "cmofl/core/objectives.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cmofl;

namespace {

std::vector<ObjectiveVector> random_set(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                        bool discrete) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> grid(0, 4);
  std::vector<ObjectiveVector> out(n, ObjectiveVector(m));
  for (auto& v : out) {
    for (auto& x : v) x = discrete ? grid(rng) : unif(rng);
  }
  return out;
}

}  // namespace

TEST_CASE("dominates") {
  CHECK(dominates(ObjectiveVector{1, 2}, ObjectiveVector{2, 2}));
  CHECK_FALSE(dominates(ObjectiveVector{1, 2, 3}, ObjectiveVector{1, 2, 3}));
  CHECK_FALSE(dominates(ObjectiveVector{1, 3}, ObjectiveVector{2, 1}));
  CHECK_FALSE(dominates(ObjectiveVector{2, 1}, ObjectiveVector{1, 3}));
  CHECK_THROWS_AS(dominates(ObjectiveVector{1, 2}, ObjectiveVector{1, 2, 3}), InvalidInput);
}

TEST_CASE("dominance is irreflexive and antisymmetric") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    auto vs = random_set(rng, 2, 3, true);
    CHECK_FALSE(dominates(vs[0], vs[0]));
    if (dominates(vs[0], vs[1])) CHECK_FALSE(dominates(vs[1], vs[0]));
    CHECK(dominates(vs[0], vs[1]) == oracle::dominates(vs[0], vs[1]));
  }
}

TEST_CASE("nondominated_sort examples") {
  auto fronts = nondominated_sort({{1, 2}, {2, 1}, {2, 2}});
  REQUIRE(fronts.size() == 2);
  CHECK(fronts[0] == std::vector<std::size_t>{0, 1});
  CHECK(fronts[1] == std::vector<std::size_t>{2});

  CHECK(nondominated_sort({{3, 4}}) == std::vector<std::vector<std::size_t>>{{0}});
  auto same = nondominated_sort({{1, 1}, {1, 1}, {1, 1}});
  REQUIRE(same.size() == 1);
  CHECK(same[0].size() == 3);

  CHECK_THROWS_AS(nondominated_sort({}), InvalidInput);
  CHECK_THROWS_AS(nondominated_sort({{1, 2}, {1, 2, 3}}), InvalidInput);
}

TEST_CASE("nondominated_sort matches the peeling oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 64;
    const std::size_t m = 2 + rng() % 2;
    auto vs = random_set(rng, n, m, trial % 2 == 0);
    auto fronts = nondominated_sort(vs);
    auto expected = oracle::peel_fronts(vs);
    REQUIRE(fronts.size() == expected.size());
    for (std::size_t f = 0; f < fronts.size(); ++f) {
      CHECK(std::set<std::size_t>(fronts[f].begin(), fronts[f].end()) == expected[f]);
    }
  }
}

TEST_CASE("crowding distance") {
  const double inf = std::numeric_limits<double>::infinity();
  auto two = crowding_distance({{0, 1}, {1, 0}});
  CHECK(two == std::vector<double>{inf, inf});

  auto three = crowding_distance({{0, 2}, {1, 1}, {2, 0}});
  CHECK(std::isinf(three[0]));
  CHECK(std::isinf(three[2]));
  CHECK(three[1] == doctest::Approx(2.0).epsilon(1e-15));

  auto flat = crowding_distance({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
  CHECK(flat[1] == 0.0);
  CHECK(flat[2] == 0.0);

  // One degenerate objective contributes nothing; the other still counts.
  auto half = crowding_distance({{0, 5}, {1, 5}, {3, 5}});
  CHECK(half[1] == doctest::Approx(1.0));
}

TEST_CASE("hypervolume examples") {
  CHECK(hypervolume({{1, 2}, {2, 1}}, {3, 3}) == 3.0);
  CHECK(hypervolume({{0, 0}}, {1, 1}) == 1.0);
  CHECK(hypervolume({}, {1, 1}) == 0.0);
  CHECK(hypervolume({}, {1, 1, 1}) == 0.0);
  CHECK(hypervolume({{0, 0, 0}}, {1, 2, 3}) == 6.0);
  CHECK_THROWS_AS(hypervolume({{0, 0, 0, 0}}, {1, 1, 1, 1}), UnsupportedDimension);

  // Points beyond the reference are left out of the union.
  CHECK(hypervolume({{1, 2}, {2, 1}, {4, 0}}, {3, 3}) == 3.0);
  CHECK(count_outside_reference({{1, 2}, {2, 1}, {4, 0}}, {3, 3}) == 1);
}

TEST_CASE("hypervolume equals inclusion-exclusion on small sets") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + trial % 2;
    auto pts = random_set(rng, 1 + rng() % 8, m, trial % 3 == 0);
    ObjectiveVector z(m, 1.0);
    if (trial % 3 == 0) std::fill(z.begin(), z.end(), 4.0);
    CHECK(hypervolume(pts, z) == doctest::Approx(oracle::inclusion_exclusion_hv(pts, z)).epsilon(1e-12));
  }
}

TEST_CASE("hypervolume agrees with Monte Carlo") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t m = 2 + trial % 2;
    auto pts = random_set(rng, 20, m, false);
    ObjectiveVector z(m, 1.0);
    auto est = oracle::monte_carlo_hv(pts, ObjectiveVector(m, 0.0), z, 200000, 100 + trial);
    CHECK(std::abs(hypervolume(pts, z) - est.value) <= 3.0 * est.standard_error);
  }
}

TEST_CASE("hypervolume is monotone under insertion") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + trial % 2;
    auto pts = random_set(rng, 1 + rng() % 15, m, false);
    const ObjectiveVector z(m, 1.0);
    const double before = hypervolume(pts, z);
    auto extra = random_set(rng, 1, m, false)[0];
    auto grown = pts;
    grown.push_back(extra);
    CHECK(hypervolume(grown, z) >= before - 1e-15);

    // A point weakly dominated by a member adds nothing.
    auto shadow = pts[0];
    for (auto& v : shadow) v = v + unif(rng) * (1.0 - v);
    auto same = pts;
    same.push_back(shadow);
    CHECK(hypervolume(same, z) == doctest::Approx(before).epsilon(1e-12));
  }
}

TEST_CASE("penalize") {
  ConstraintSpec c{{std::nullopt, 0.8}, {0.0, 20.0}};
  auto y = penalize(ObjectiveVector{0.3, 0.9}, c);
  CHECK(y[0] == 0.3);
  CHECK(y[1] == doctest::Approx(2.9).epsilon(1e-14));
  CHECK(penalize(ObjectiveVector{0.3, 0.8}, c)[1] == 0.8);
  CHECK(c.feasible(ObjectiveVector{0.3, 0.8}));
  CHECK_FALSE(c.feasible(ObjectiveVector{0.3, 0.80001}));
  CHECK_THROWS_AS(penalize(ObjectiveVector{0.3}, c), InvalidInput);
}

TEST_CASE("penalize preserves feasibility and feasible dominance") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ConstraintSpec c{{0.5, std::nullopt, 0.7}, {3.0, 0.0, 20.0}};
  for (int trial = 0; trial < 2000; ++trial) {
    ObjectiveVector a{unif(rng), unif(rng), unif(rng)};
    ObjectiveVector b{unif(rng), unif(rng), unif(rng)};
    auto pa = penalize(a, c);
    for (std::size_t i = 0; i < 3; ++i) {
      const bool violates = c.bounds[i] && a[i] > *c.bounds[i] && c.penalties[i] > 0;
      CHECK((pa[i] > a[i]) == violates);
    }
    if (c.feasible(a) && c.feasible(b)) {
      CHECK(dominates(pa, penalize(b, c)) == dominates(a, b));
    }
  }
}

TEST_CASE("aggregate_objective") {
  const std::vector<double> locals{0.2, 0.4};
  const std::vector<double> half{0.5, 0.5};
  CHECK(aggregate_objective(locals, half, AggregationMode::kAverage) ==
        doctest::Approx(0.3).epsilon(1e-15));
  CHECK(aggregate_objective(locals, {}, AggregationMode::kWorst) == 0.4);
  const std::vector<double> one{0.7};
  const std::vector<double> w1{1.0};
  CHECK(aggregate_objective(one, w1, AggregationMode::kAverage) == 0.7);
  CHECK(aggregate_objective(one, w1, AggregationMode::kWorst) == 0.7);
  const std::vector<double> bad{0.5, 0.6};
  CHECK_THROWS_AS(aggregate_objective(locals, bad, AggregationMode::kAverage), InvalidInput);
}
