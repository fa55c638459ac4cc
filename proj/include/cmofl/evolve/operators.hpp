#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cmofl/core/rng.hpp"

namespace cmofl::evolve {

using Genes = std::vector<double>;
using GenePair = std::pair<Genes, Genes>;

struct SbxParams {
  double probability = 0.9;  // chance a parent pair is crossed at all
  double eta = 2.0;          // distribution index n_c
  double gene_probability = 0.5;
};

// Unclipped SBX children of genes x1, x2 for uniform draw u in [0,1).
// c1 + c2 == x1 + x2 holds exactly in real arithmetic.
std::pair<double, double> sbx_spread(double x1, double x2, double u, double eta);

// Simulated binary crossover on real chromosomes in [0,1]^d; children clipped.
GenePair sbx_crossover(std::span<const double> p1, std::span<const double> p2,
                       const SbxParams& params, Rng& rng);

// Bounded polynomial mutation: each gene mutates with probability `rate`,
// never leaving [0,1].
Genes polynomial_mutation(std::span<const double> p, double eta, double rate, Rng& rng);

struct BinaryVariationParams {
  double crossover_probability = 0.9;
  double flip_probability = 0.1;
};

// Children take p1[0, cut) + p2[cut, n) and p2[0, cut) + p1[cut, n).
GenePair single_point_crossover(std::span<const double> p1, std::span<const double> p2,
                                std::size_t cut);

// Single-point crossover followed by per-bit flips on {0,1} chromosomes.
GenePair binary_variation(std::span<const double> p1, std::span<const double> p2,
                          const BinaryVariationParams& params, Rng& rng);

// Maps groups of `bits_per_variable` bits (MSB first) to reals in [0,1].
std::vector<double> decode_binary(std::span<const double> bits, std::size_t bits_per_variable);

}  // namespace cmofl::evolve
