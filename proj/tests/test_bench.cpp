#include <cmath>

#include "cmofl/bench/problems.hpp"
#include "cmofl/core/errors.hpp"
#include "doctest.h"

using namespace cmofl;
using namespace cmofl::bench;

TEST_CASE("zdt1 values") {
  CHECK(zdt1(std::vector<double>(5, 0.0)) == ObjectiveVector{0.0, 1.0});
  CHECK(zdt1(std::vector<double>{1, 0, 0, 0}) == ObjectiveVector{1.0, 0.0});
  for (double f1 : {0.0, 0.04, 0.25, 0.64, 1.0}) {
    auto y = zdt1(std::vector<double>{f1, 0, 0});
    CHECK(y[1] == doctest::Approx(1.0 - std::sqrt(f1)));
  }
  CHECK_THROWS_AS(zdt1(std::vector<double>{0.5}), InvalidInput);
  CHECK_THROWS_AS(zdt1(std::vector<double>{0.5, 1.5}), InvalidInput);
}

TEST_CASE("constrained toy") {
  const auto c = constrained_toy_constraints();
  auto y = constrained_toy(std::vector<double>{0.3, 0.5});
  CHECK(y[1] == doctest::Approx(0.7));
  CHECK(c.feasible(y));
  auto bad = constrained_toy(std::vector<double>{0.1, 0.5});
  CHECK_FALSE(c.feasible(bad));
  CHECK(penalize(bad, c)[1] == doctest::Approx(2.9).epsilon(1e-14));
  for (int i = 0; i <= 100; ++i) {
    const double x1 = i / 100.0;
    CHECK(c.feasible(constrained_toy(std::vector<double>{x1, 0.9})) == (x1 >= 0.2 - 1e-12));
  }
}

TEST_CASE("brute_force_front on ZDT1 tracks the analytic curve") {
  auto zdt = make_zdt1(2);
  auto front = brute_force_front(zdt, {.resolution = 101});
  REQUIRE(!front.empty());
  for (const auto& y : front) CHECK(std::abs(y[1] - (1.0 - std::sqrt(y[0]))) <= 0.01);
}

TEST_CASE("brute_force_front edge cases") {
  auto zdt = make_zdt1(2);
  auto single = brute_force_front(zdt, {.resolution = 1, .fixed_value = 0.25});
  REQUIRE(single.size() == 1);
  CHECK(single[0] == zdt1(std::vector<double>{0.25, 0.25}));

  auto toy = make_constrained_toy(3);
  auto feasible = brute_force_front(toy, {.resolution = 21, .feasible_only = true});
  REQUIRE(!feasible.empty());
  for (const auto& y : feasible) CHECK(y[1] <= 0.8 + 1e-12);

  auto big = make_zdt1(10);
  CHECK_THROWS_AS(brute_force_front(big, {.resolution = 1000, .gridded_axes = 3}), ResourceError);
  // Coordinate-restricted grid on a 10-d problem still lands on the front.
  auto restricted = brute_force_front(big, {.resolution = 51});
  for (const auto& y : restricted) CHECK(std::abs(y[1] - (1.0 - std::sqrt(y[0]))) <= 1e-12);
}

TEST_CASE("first front of a grid equals the brute-force front") {
  auto toy = make_constrained_toy(2);
  auto front = brute_force_front(toy, {.resolution = 15});
  std::vector<ObjectiveVector> grid;
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) grid.push_back(constrained_toy(std::vector<double>{i / 14.0, j / 14.0}));
  }
  auto fronts = nondominated_sort(grid);
  std::vector<ObjectiveVector> first;
  for (auto i : fronts[0]) first.push_back(grid[i]);
  std::sort(first.begin(), first.end());
  std::sort(front.begin(), front.end());
  CHECK(first == front);
}

TEST_CASE("random search budget layout") {
  auto zdt = make_zdt1(4);
  RandomSearchOptions opt{.dimension = 4, .objectives = 2, .reference = {1, 1}, .seed = 1};
  std::optional<RandomSearchState> mid;
  opt.on_generation = [&](const RandomSearchState& s) {
    if (s.generation == 2) mid = s;
  };
  const RandomSearchConfig cfg{.initial = 5, .generations = 4, .batch = 3};
  auto res = run_random_search(cfg, zdt.default_constraints(), zdt.evaluator(), opt);
  CHECK(res.archive.entries.size() == 5 + 4 * 3);
  CHECK(res.trace.size() == 4);
  for (std::size_t t = 1; t < res.trace.size(); ++t) {
    CHECK(res.trace[t].hv_feasible >= res.trace[t - 1].hv_feasible);
  }
  REQUIRE(mid);
  opt.on_generation = nullptr;
  opt.resume = mid;
  auto resumed = run_random_search(cfg, zdt.default_constraints(), zdt.evaluator(), opt);
  REQUIRE(resumed.archive.entries.size() == res.archive.entries.size());
  for (std::size_t i = 0; i < res.archive.entries.size(); ++i) {
    CHECK(resumed.archive.entries[i].solution == res.archive.entries[i].solution);
  }
}
