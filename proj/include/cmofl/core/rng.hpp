#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

namespace cmofl {

using Rng = std::mt19937_64;

// Derives an independent sub-seed from a base seed and a tag path
// (e.g. {generation, index}). SplitMix64 finalizer per step.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(seed, tags));
}

// Latin hypercube sample of n points in [0,1]^d.
std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t d, Rng& rng);

// Uniform draw from the probability simplex of dimension m (Dirichlet(1,...,1)).
std::vector<double> sample_simplex(std::size_t m, Rng& rng);

std::string save_rng_state(const Rng& rng);
Rng load_rng_state(const std::string& state);

}  // namespace cmofl
