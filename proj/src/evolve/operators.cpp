#include "cmofl/evolve/operators.hpp"

#include <algorithm>
#include <cmath>

#include "cmofl/core/errors.hpp"

namespace cmofl::evolve {
namespace {

void require_same_length(std::span<const double> a, std::span<const double> b,
                         const char* op) {
  if (a.size() != b.size()) {
    throw InvalidInput(std::string(op) + ": parent chromosomes differ in length");
  }
}

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::pair<double, double> sbx_spread(double x1, double x2, double u, double eta) {
  const double beta = (u <= 0.5) ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                                 : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
  const double c1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2);
  const double c2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2);
  return {c1, c2};
}

GenePair sbx_crossover(std::span<const double> p1, std::span<const double> p2,
                       const SbxParams& params, Rng& rng) {
  require_same_length(p1, p2, "sbx_crossover");
  Genes c1(p1.begin(), p1.end());
  Genes c2(p2.begin(), p2.end());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (unif(rng) >= params.probability) return {c1, c2};
  for (std::size_t i = 0; i < c1.size(); ++i) {
    if (unif(rng) >= params.gene_probability) continue;
    const double u = unif(rng);
    if (std::abs(p1[i] - p2[i]) < 1e-14) continue;
    auto [a, b] = sbx_spread(p1[i], p2[i], u, params.eta);
    c1[i] = clip01(a);
    c2[i] = clip01(b);
  }
  return {c1, c2};
}

Genes polynomial_mutation(std::span<const double> p, double eta, double rate, Rng& rng) {
  Genes out(p.begin(), p.end());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double power = 1.0 / (eta + 1.0);
  for (auto& x : out) {
    if (unif(rng) >= rate) continue;
    const double u = unif(rng);
    const double below = x;        // distance to lower bound
    const double above = 1.0 - x;  // distance to upper bound
    double dq;
    if (u < 0.5) {
      const double v = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - below, eta + 1.0);
      dq = std::pow(v, power) - 1.0;
    } else {
      const double v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - above, eta + 1.0);
      dq = 1.0 - std::pow(v, power);
    }
    x = clip01(x + dq);
  }
  return out;
}

GenePair single_point_crossover(std::span<const double> p1, std::span<const double> p2,
                                std::size_t cut) {
  require_same_length(p1, p2, "single_point_crossover");
  if (cut > p1.size()) throw InvalidInput("single_point_crossover: cut beyond chromosome");
  Genes c1(p1.begin(), p1.end());
  Genes c2(p2.begin(), p2.end());
  for (std::size_t i = cut; i < c1.size(); ++i) std::swap(c1[i], c2[i]);
  return {c1, c2};
}

GenePair binary_variation(std::span<const double> p1, std::span<const double> p2,
                          const BinaryVariationParams& params, Rng& rng) {
  require_same_length(p1, p2, "binary_variation");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  GenePair kids{Genes(p1.begin(), p1.end()), Genes(p2.begin(), p2.end())};
  if (p1.size() > 1 && unif(rng) < params.crossover_probability) {
    std::uniform_int_distribution<std::size_t> pick(1, p1.size() - 1);
    kids = single_point_crossover(p1, p2, pick(rng));
  }
  for (auto* child : {&kids.first, &kids.second}) {
    for (auto& bit : *child) {
      if (unif(rng) < params.flip_probability) bit = (bit > 0.5) ? 0.0 : 1.0;
    }
  }
  return kids;
}

std::vector<double> decode_binary(std::span<const double> bits, std::size_t bits_per_variable) {
  if (bits_per_variable == 0 || bits_per_variable > 52 || bits.size() % bits_per_variable != 0) {
    throw InvalidInput("decode_binary: chromosome length is not a multiple of bits per variable");
  }
  const double scale = std::ldexp(1.0, static_cast<int>(bits_per_variable)) - 1.0;
  std::vector<double> out;
  out.reserve(bits.size() / bits_per_variable);
  for (std::size_t start = 0; start < bits.size(); start += bits_per_variable) {
    double v = 0.0;
    for (std::size_t b = 0; b < bits_per_variable; ++b) {
      v = 2.0 * v + (bits[start + b] > 0.5 ? 1.0 : 0.0);
    }
    out.push_back(v / scale);
  }
  return out;
}

}  // namespace cmofl::evolve
