#include "cmofl/fl/flo.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "cmofl/core/errors.hpp"
#include "cmofl/core/rng.hpp"

namespace cmofl::fl {
namespace {

constexpr std::uint64_t kInitTag = 0x494e4954;
constexpr std::uint64_t kTrainTag = 0x5452414e;
constexpr std::uint64_t kNoiseTag = 0x4e4f4953;
constexpr std::uint64_t kMaskTag = 0x4d41534b;

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

struct ClientUpload {
  std::vector<double> params;
  double leakage = 0.0;
  double train_seconds = 0.0;
  protect::SparsifyOutput sparse;  // filled for sparsification only
};

}  // namespace

std::vector<double> fedavg(const std::vector<std::vector<double>>& models) {
  if (models.empty()) throw InvalidInput("fedavg: no models");
  const std::vector<double> w(models.size(), 1.0 / static_cast<double>(models.size()));
  return fedavg(models, w);
}

std::vector<double> fedavg(const std::vector<std::vector<double>>& models,
                           std::span<const double> weights) {
  if (models.empty()) throw InvalidInput("fedavg: no models");
  if (weights.size() != models.size()) throw InvalidInput("fedavg: weight count mismatch");
  const std::size_t d = models.front().size();
  for (const auto& m : models) {
    if (m.size() != d) throw InvalidInput("fedavg: parameter dimension mismatch");
  }
  if (models.size() == 1) return models.front();
  std::vector<double> out(d, 0.0);
  for (std::size_t k = 0; k < models.size(); ++k) {
    for (std::size_t i = 0; i < d; ++i) out[i] += weights[k] * models[k][i];
  }
  return out;
}

std::uint64_t local_training_seed(std::uint64_t seed, std::size_t round, std::size_t client) {
  return derive_seed(seed, {kTrainTag, round, client});
}

EvaluationResult flo_evaluate(const FederatedData& data, const FLRunConfig& cfg,
                              const Mechanism& mechanism) {
  cfg.model.validate();
  const std::size_t k_clients = data.clients.size();
  if (k_clients == 0) throw ConfigError("flo_evaluate: no clients");
  if (cfg.model.inputs != data.features || cfg.model.classes != data.classes) {
    throw ConfigError("flo_evaluate: model shape does not match the dataset");
  }
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("flo_evaluate: learning rate must be > 0");

  const std::size_t dim = cfg.model.parameter_count();
  Rng init_rng = make_rng(cfg.seed, {kInitTag});
  std::vector<double> global = init_parameters(cfg.model, init_rng);

  std::vector<double> weights(k_clients, 1.0 / static_cast<double>(k_clients));
  if (cfg.weighting == ServerWeighting::kSampleCount) {
    double n = 0.0;
    for (const auto& c : data.clients) n += static_cast<double>(c.size());
    for (std::size_t k = 0; k < k_clients; ++k) {
      weights[k] = static_cast<double>(data.clients[k].size()) / n;
    }
  }

  // Sparsification connection masks: one per client, fixed for the evaluation.
  std::vector<std::vector<bool>> public_masks;
  if (const auto* sf = std::get_if<protect::SparsificationParams>(&mechanism)) {
    const auto layout = cfg.model.connection_layout();
    for (std::size_t k = 0; k < k_clients; ++k) {
      Rng mask_rng = make_rng(cfg.seed, {kMaskTag, k});
      public_masks.push_back(protect::draw_public_mask(layout, sf->rho, mask_rng));
    }
  }

  EvaluationResult res;
  for (std::size_t round = 0; round < cfg.rounds && !res.diverged; ++round) {
    std::vector<ClientUpload> uploads(k_clients);
    for (std::size_t k = 0; k < k_clients; ++k) {
      Rng train_rng(local_training_seed(cfg.seed, round, k));
      const auto started = std::chrono::steady_clock::now();
      auto local = local_sgd(cfg.model, data.clients[k], global, cfg.local_epochs,
                             cfg.batch_size, cfg.learning_rate, train_rng);
      const auto elapsed = std::chrono::steady_clock::now() - started;
      if (local.diverged) {
        res.diverged = true;
        break;
      }
      auto& up = uploads[k];
      up.train_seconds =
          cfg.cost_model
              ? cfg.seconds_per_sample_parameter * static_cast<double>(cfg.local_epochs) *
                    static_cast<double>(data.clients[k].size()) * static_cast<double>(dim)
              : std::chrono::duration<double>(elapsed).count();

      std::visit(
          [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, NoProtection>) {
              up.params = std::move(local.params);
              up.leakage = 1.0;
            } else if constexpr (std::is_same_v<M, protect::RandomizationParams>) {
              auto p = m;
              p.dim = dim;
              Rng noise_rng = make_rng(cfg.seed, {kNoiseTag, round, k});
              up.params = protect::rd_protect(local.params, p, noise_rng);
              up.leakage = protect::rd_leakage(p);
            } else if constexpr (std::is_same_v<M, protect::BatchCryptParams>) {
              auto p = m;
              p.clients = k_clients;
              up.params = protect::bc_protect(local.params, p).dequantized;
              up.leakage = 0.0;  // only ciphertexts leave the client
            } else {
              up.sparse = protect::sf_protect(local.params, global, public_masks[k], m.xi);
              up.leakage = protect::sf_leakage(up.sparse.hidden_values(local.params), m.c2);
              up.params = up.sparse.shared;
            }
          },
          mechanism);
      if (!all_finite(up.params)) {
        res.diverged = true;
        break;
      }
    }
    if (res.diverged) break;

    double round_leak = 0.0;
    for (const auto& up : uploads) round_leak += up.leakage;
    round_leak /= static_cast<double>(k_clients);

    double round_cost = 0.0;
    if (const auto* bc = std::get_if<protect::BatchCryptParams>(&mechanism)) {
      std::vector<double> times;
      for (const auto& up : uploads) times.push_back(up.train_seconds);
      auto p = *bc;
      p.clients = k_clients;
      round_cost = protect::bc_cost(dim, p, times);
    } else if (std::holds_alternative<protect::SparsificationParams>(mechanism)) {
      std::vector<protect::SparsifyOutput> masks;
      for (auto& up : uploads) masks.push_back(std::move(up.sparse));
      round_cost = protect::sf_cost(masks);
      // Server fills each coordinate from the clients that shared it.
      std::vector<double> next = global;
      for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        double wsum = 0.0;
        for (std::size_t k = 0; k < k_clients; ++k) {
          const bool shared = masks[k].state[i] == protect::Share::kShared;
          if (cfg.sparse_aggregation == SparseAggregation::kAllClients) {
            acc += weights[k] * (shared ? uploads[k].params[i] : global[i]);
            wsum += weights[k];
          } else if (shared) {
            acc += weights[k] * uploads[k].params[i];
            wsum += weights[k];
          }
        }
        if (wsum > 0.0) next[i] = acc / wsum;
      }
      global = std::move(next);
    } else {
      for (const auto& up : uploads) round_cost += up.train_seconds;
      round_cost /= static_cast<double>(k_clients);
    }

    if (!std::holds_alternative<protect::SparsificationParams>(mechanism)) {
      std::vector<std::vector<double>> models;
      for (auto& up : uploads) models.push_back(std::move(up.params));
      global = fedavg(models, weights);
    }
    if (!all_finite(global)) {
      res.diverged = true;
      break;
    }
    res.round_leakage.push_back(round_leak);
    res.round_cost.push_back(round_cost);
    res.round_test_error.push_back(1.0 - accuracy(cfg.model, global, data.test));
  }

  if (!res.round_leakage.empty()) {
    res.privacy_leakage =
        std::accumulate(res.round_leakage.begin(), res.round_leakage.end(), 0.0) /
        static_cast<double>(res.round_leakage.size());
    const double cost_sum = std::accumulate(res.round_cost.begin(), res.round_cost.end(), 0.0);
    res.training_cost = std::holds_alternative<protect::SparsificationParams>(mechanism)
                            ? cost_sum / static_cast<double>(res.round_cost.size())
                            : cost_sum;
  }
  res.utility_loss = res.diverged ? 1.0 : 1.0 - accuracy(cfg.model, global, data.test);
  return res;
}

}  // namespace cmofl::fl
