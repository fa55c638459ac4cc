#pragma once

// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

namespace oracle {

inline bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  bool all_le = true;
  bool any_lt = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    all_le = all_le && a[i] <= b[i];
    any_lt = any_lt || a[i] < b[i];
  }
  return all_le && any_lt;
}

// Peels non-dominated layers one at a time: O(n^2 m) per layer.
inline std::vector<std::set<std::size_t>> peel_fronts(const std::vector<std::vector<double>>& vs) {
  std::vector<std::set<std::size_t>> fronts;
  std::vector<bool> removed(vs.size(), false);
  std::size_t left = vs.size();
  while (left > 0) {
    std::set<std::size_t> layer;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (removed[i]) continue;
      bool dom = false;
      for (std::size_t j = 0; j < vs.size() && !dom; ++j) {
        dom = !removed[j] && j != i && dominates(vs[j], vs[i]);
      }
      if (!dom) layer.insert(i);
    }
    for (auto i : layer) removed[i] = true;
    left -= layer.size();
    fronts.push_back(layer);
  }
  return fronts;
}

struct MonteCarloEstimate {
  double value;
  double standard_error;
};

// Uniform sampling in the box [lower, z]; a sample counts when some point
// weakly dominates it.
inline MonteCarloEstimate monte_carlo_hv(const std::vector<std::vector<double>>& pts,
                                         const std::vector<double>& lower,
                                         const std::vector<double>& z, std::size_t samples,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t m = z.size();
  double box = 1.0;
  for (std::size_t i = 0; i < m; ++i) box *= z[i] - lower[i];
  std::vector<std::uniform_real_distribution<double>> axes;
  for (std::size_t i = 0; i < m; ++i) axes.emplace_back(lower[i], z[i]);
  std::size_t hits = 0;
  std::vector<double> s(m);
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t i = 0; i < m; ++i) s[i] = axes[i](rng);
    for (const auto& p : pts) {
      bool covers = true;
      for (std::size_t i = 0; i < m && covers; ++i) covers = p[i] <= s[i];
      if (covers) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  const double se = box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples));
  return {box * frac, se};
}

// Exact HV by inclusion-exclusion over all subsets (small sets only).
inline double inclusion_exclusion_hv(const std::vector<std::vector<double>>& pts,
                                     const std::vector<double>& z) {
  const std::size_t n = pts.size();
  double total = 0.0;
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> corner(z.size(), -1e300);
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      ++bits;
      for (std::size_t j = 0; j < z.size(); ++j) corner[j] = std::max(corner[j], pts[i][j]);
    }
    double vol = 1.0;
    for (std::size_t j = 0; j < z.size(); ++j) vol *= std::max(0.0, z[j] - corner[j]);
    total += (bits % 2 == 1 ? 1.0 : -1.0) * vol;
  }
  return total;
}

// Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t k = i + 1; k < n; ++k) acc -= a[i][k] * x[k];
    x[i] = acc / a[i][i];
  }
  return x;
}

}  // namespace oracle
