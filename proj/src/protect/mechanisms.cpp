#include "cmofl/protect/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cmofl/core/errors.hpp"

namespace cmofl::protect {

std::vector<double> rd_protect(std::span<const double> w, const RandomizationParams& p, Rng& rng) {
  std::vector<double> out(w.begin(), w.end());
  double norm = 0.0;
  for (double v : out) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > p.clip && norm > 0.0) {
    const double scale = p.clip / norm;
    for (auto& v : out) v *= scale;
  }
  if (p.sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, p.sigma);
    for (auto& v : out) v += noise(rng);
  }
  return out;
}

double rd_leakage(const RandomizationParams& p) {
  if (!(p.clip > 0.0)) throw InvalidInput("rd_leakage: clip norm must be positive");
  const double distortion =
      p.c1 * (p.sigma * p.sigma) / (p.clip * p.clip) * std::sqrt(static_cast<double>(p.dim));
  return 1.0 - std::min(1.0, distortion);
}

std::size_t bc_value_bits(const BatchCryptParams& p) {
  if (p.batch_size == 0) throw ConfigError("BatchCrypt batch size must be positive");
  const std::size_t k = std::max<std::size_t>(p.clients, 1);
  std::size_t headroom = 1;
  while ((std::size_t{1} << (headroom - 1)) < k) ++headroom;  // ceil(log2 K) + 1
  const std::size_t slot = p.payload_bits / p.batch_size;
  if (slot < headroom + 2) {
    throw ConfigError("BatchCrypt batch size " + std::to_string(p.batch_size) +
                      " leaves fewer than 2 bits per value in a " +
                      std::to_string(p.payload_bits) + "-bit payload for " +
                      std::to_string(k) + " clients");
  }
  return slot - headroom;
}

std::size_t bc_quantizer_bits(const BatchCryptParams& p) {
  return std::min<std::size_t>(bc_value_bits(p), 32);
}

BatchCryptOutput bc_protect(std::span<const double> w, const BatchCryptParams& p) {
  const std::size_t bits = bc_quantizer_bits(p);
  const double levels = std::ldexp(1.0, static_cast<int>(bits) - 1) - 1.0;
  BatchCryptOutput out;
  for (double v : w) {
    if (!std::isfinite(v)) throw InvalidInput("bc_protect: non-finite parameter");
    out.range = std::max(out.range, std::abs(v));
  }
  out.dequantized.resize(w.size());
  out.batches.reserve((w.size() + p.batch_size - 1) / p.batch_size);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i % p.batch_size == 0) {
      out.batches.emplace_back();
      out.batches.back().reserve(std::min(p.batch_size, w.size() - i));
    }
    std::int64_t q = 0;
    if (out.range > 0.0) q = static_cast<std::int64_t>(std::llround(w[i] / out.range * levels));
    out.batches.back().push_back(q);
    out.dequantized[i] = (static_cast<double>(q) / levels) * out.range;
  }
  return out;
}

double bc_cost(std::size_t dim, const BatchCryptParams& p, std::span<const double> train_times) {
  if (train_times.empty()) return 0.0;
  const double batches =
      static_cast<double>((dim + p.batch_size - 1) / std::max<std::size_t>(p.batch_size, 1));
  const double k = static_cast<double>(train_times.size());
  const double aggregate = batches * (k * p.t_add + p.t_dec);
  double total = 0.0;
  for (double t : train_times) {
    if (t < 0.0) throw InvalidInput("bc_cost: negative training time");
    total += t + batches * p.t_enc + aggregate;
  }
  return total / k;
}

std::vector<bool> draw_public_mask(const std::vector<bool>& is_connection, double rho, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<bool> mask(is_connection.size(), true);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (is_connection[i]) mask[i] = unif(rng) < rho;
  }
  return mask;
}

std::vector<double> SparsifyOutput::hidden_values(std::span<const double> w_new) const {
  std::vector<double> out;
  out.reserve(retained_count + private_count);
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] != Share::kShared) out.push_back(w_new[i]);
  }
  return out;
}

SparsifyOutput sf_protect(std::span<const double> w_new, std::span<const double> w_old,
                          const std::vector<bool>& public_mask, double xi) {
  if (w_new.size() != w_old.size() || w_new.size() != public_mask.size()) {
    throw InvalidInput("sf_protect: parameter vectors and mask differ in length");
  }
  const std::size_t n = w_new.size();
  SparsifyOutput out;
  out.state.assign(n, Share::kPrivate);
  std::vector<std::size_t> pub;
  for (std::size_t i = 0; i < n; ++i) {
    if (public_mask[i]) pub.push_back(i);
  }
  const auto keep = static_cast<std::size_t>(std::floor(xi * static_cast<double>(pub.size())));
  std::stable_sort(pub.begin(), pub.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(w_new[a] - w_old[a]) < std::abs(w_new[b] - w_old[b]);
  });
  for (std::size_t r = 0; r < pub.size(); ++r) {
    out.state[pub[r]] = r < keep ? Share::kRetained : Share::kShared;
  }
  out.shared.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (out.state[i]) {
      case Share::kShared:
        out.shared[i] = w_new[i];
        ++out.shared_count;
        break;
      case Share::kRetained:
        out.shared[i] = w_old[i];
        ++out.retained_count;
        break;
      case Share::kPrivate:
        out.shared[i] = w_old[i];
        ++out.private_count;
        break;
    }
  }
  return out;
}

SparsifyOutput sf_protect(std::span<const double> w_new, std::span<const double> w_old,
                          const SparsificationParams& p, Rng& rng) {
  const std::vector<bool> all(w_new.size(), true);
  return sf_protect(w_new, w_old, draw_public_mask(all, p.rho, rng), p.xi);
}

double sf_leakage(std::span<const double> retained_values, double c2) {
  if (!(c2 > 0.0)) throw InvalidInput("sf_leakage: C2 must be positive");
  double mu = 0.0;
  for (double v : retained_values) mu += std::abs(v);
  if (!retained_values.empty()) mu /= static_cast<double>(retained_values.size());
  const double leak = 1.0 - std::sqrt(2.0) * std::sqrt(1.0 - std::exp(-mu / c2));
  return std::clamp(leak, 0.0, 1.0);
}

double sf_cost(const std::vector<SparsifyOutput>& clients) {
  if (clients.empty()) return 0.0;
  double total = 0.0;
  for (const auto& c : clients) total += static_cast<double>(c.shared_count);
  return total / static_cast<double>(clients.size());
}

}  // namespace cmofl::protect
