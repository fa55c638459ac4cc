#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "cmofl/fl/dataset.hpp"
#include "cmofl/fl/mlp.hpp"
#include "cmofl/protect/mechanisms.hpp"

namespace cmofl::fl {

struct NoProtection {};

using Mechanism = std::variant<NoProtection, protect::RandomizationParams,
                               protect::BatchCryptParams, protect::SparsificationParams>;

enum class ServerWeighting { kUniform, kSampleCount };

// How the server fills coordinates under sparsification.
enum class SparseAggregation {
  kSharedMean,  // mean over clients that shared the coordinate, else keep old value
  kAllClients,  // mean over all K with unshared coordinates taken as the old value
};

struct FLRunConfig {
  std::size_t rounds = 10;      // I
  std::size_t local_epochs = 5;
  std::size_t batch_size = 64;
  double learning_rate = 0.1;   // eta, [0.01, 0.3] in every setting
  ModelSpec model;
  std::uint64_t seed = 0;
  ServerWeighting weighting = ServerWeighting::kUniform;
  SparseAggregation sparse_aggregation = SparseAggregation::kSharedMean;
  // Deterministic stand-in for wall-clock training time; off means steady_clock.
  bool cost_model = true;
  double seconds_per_sample_parameter = 2e-9;
};

struct EvaluationResult {
  double utility_loss = 1.0;    // eps_u = 1 - test accuracy
  double privacy_leakage = 0.0; // eps_p, mean over rounds
  double training_cost = 0.0;   // eps_c
  bool diverged = false;
  std::vector<double> round_leakage;
  std::vector<double> round_cost;
  std::vector<double> round_test_error;
};

// Componentwise mean of K parameter vectors.
std::vector<double> fedavg(const std::vector<std::vector<double>>& models);
std::vector<double> fedavg(const std::vector<std::vector<double>>& models,
                           std::span<const double> weights);

// Sub-seed of client k's local training in round i; exposed so a
// centralized replay can reproduce the same shuffles.
std::uint64_t local_training_seed(std::uint64_t seed, std::size_t round, std::size_t client);

// Federated learning optimization loop for one solution: I rounds of local
// SGD, protection, upload and server averaging, with per-round privacy
// leakage and cost measured by the mechanism.
EvaluationResult flo_evaluate(const FederatedData& data, const FLRunConfig& cfg,
                              const Mechanism& mechanism);

}  // namespace cmofl::fl
