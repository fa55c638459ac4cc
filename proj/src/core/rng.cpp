#include "cmofl/core/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cmofl/core/errors.hpp"

namespace cmofl {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t t : tags) h = splitmix(h ^ splitmix(t + 0x632be59bd9b4e019ULL));
  return h;
}

std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t d, Rng& rng) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::size_t> perm(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      pts[i][j] = (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(n);
    }
  }
  return pts;
}

std::vector<double> sample_simplex(std::size_t m, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> w(m);
  double total = 0.0;
  for (auto& v : w) {
    v = -std::log1p(-unif(rng));
    total += v;
  }
  if (!(total > 0.0)) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(m));
    return w;
  }
  for (auto& v : w) v /= total;
  return w;
}

std::string save_rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

Rng load_rng_state(const std::string& state) {
  std::istringstream is(state);
  Rng rng;
  is >> rng;
  if (is.fail()) throw FormatError("corrupt random generator state");
  return rng;
}

}  // namespace cmofl
