#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cmofl/core/rng.hpp"

namespace cmofl::protect {

// ---- Randomization (clip-by-norm + Gaussian noise) ----

struct RandomizationParams {
  double sigma = 0.0;      // sigma_rd in [0,1]
  double clip = 1.0;       // c_clip in [1,4]
  double c1 = 1.0;         // leakage constant C1
  std::size_t dim = 1;     // d_w, parameter dimension
};

std::vector<double> rd_protect(std::span<const double> w, const RandomizationParams& p, Rng& rng);

// 1 - min{1, C1 * sigma^2 / clip^2 * sqrt(d_w)}
double rd_leakage(const RandomizationParams& p);

// ---- BatchCrypt (quantize, pack, cost model) ----

struct BatchCryptParams {
  std::size_t batch_size = 100;     // bs in {100, 200, 400, 800}
  std::size_t payload_bits = 4096;  // ciphertext payload width
  std::size_t clients = 5;          // K, sizes the aggregation headroom
  // Per-batch operation costs in seconds. Placeholder values that only fix
  // the ordering of costs; they are not measurements of real cryptography.
  double t_enc = 5e-3;
  double t_add = 1e-4;
  double t_dec = 5e-3;
};

// Bits per quantized value: floor(payload / bs) - (ceil(log2 K) + 1).
// Throws ConfigError when that leaves fewer than 2 bits.
std::size_t bc_value_bits(const BatchCryptParams& p);

// Quantizer resolution actually used: bc_value_bits capped at 32.
std::size_t bc_quantizer_bits(const BatchCryptParams& p);

struct BatchCryptOutput {
  std::vector<std::vector<std::int64_t>> batches;  // bs quantized values per batch
  std::vector<double> dequantized;
  double range = 0.0;  // r = max |w_i|
};

BatchCryptOutput bc_protect(std::span<const double> w, const BatchCryptParams& p);

// Mean over clients of train + encryption time plus the server-side
// aggregation/decryption time, for a model of `dim` parameters.
double bc_cost(std::size_t dim, const BatchCryptParams& p, std::span<const double> train_times);

// ---- Sparsification (public/private sub-model split) ----

struct SparsificationParams {
  double rho = 1.0;  // connection probability in [0,1]
  double xi = 0.0;   // retained fraction in [0, 0.99]
  double c2 = 8.0;   // leakage constant C2
};

enum class Share : std::uint8_t { kShared, kRetained, kPrivate };

// Public mask: entries flagged in `is_connection` are public with
// probability rho; every other entry (biases) is always public.
std::vector<bool> draw_public_mask(const std::vector<bool>& is_connection, double rho, Rng& rng);

struct SparsifyOutput {
  std::vector<double> shared;  // W_new where shared, W_old elsewhere
  std::vector<Share> state;
  std::size_t shared_count = 0;
  std::size_t retained_count = 0;
  std::size_t private_count = 0;

  // Client-side values of every parameter kept off the server path.
  std::vector<double> hidden_values(std::span<const double> w_new) const;
};

// Among public entries the floor(xi * |public|) with the smallest
// |w_new - w_old| stay local (ties by index).
SparsifyOutput sf_protect(std::span<const double> w_new, std::span<const double> w_old,
                          const std::vector<bool>& public_mask, double xi);

// Convenience form: every entry is a connection, mask drawn from rng.
SparsifyOutput sf_protect(std::span<const double> w_new, std::span<const double> w_old,
                          const SparsificationParams& p, Rng& rng);

// Per-client leakage 1 - sqrt(2) * (1 - exp(-mu / C2))^{1/2}, mu the mean
// absolute value of the kept-back parameters, clamped to [0,1].
double sf_leakage(std::span<const double> retained_values, double c2);

// Mean number of shared parameters over clients.
double sf_cost(const std::vector<SparsifyOutput>& clients);

}  // namespace cmofl::protect
