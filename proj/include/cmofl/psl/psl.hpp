#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmofl/core/archive.hpp"
#include "cmofl/core/problem.hpp"
#include "cmofl/psl/gp.hpp"
#include "cmofl/psl/pareto_set_model.hpp"

namespace cmofl::psl {

// max_i lambda_i (y_i - z_i)
double tchebycheff(std::span<const double> y, std::span<const double> lambda,
                   std::span<const double> ideal);

// Surrogate objective values of a batch of solutions (rows) and, per
// objective, their gradients with respect to the solution.
struct SurrogateBatch {
  Eigen::MatrixXd values;              // B x m
  std::vector<Eigen::MatrixXd> grads;  // m matrices of B x d
};
using Surrogate = std::function<SurrogateBatch(const Eigen::MatrixXd& xs, bool gradients)>;

// mean - beta * std of one GP per objective.
Surrogate lcb_surrogate(std::vector<GPModel> gps, double beta);

// Penalized Tchebycheff loss used to train the Pareto set model. Objectives
// are normalized as (y - lower) / scale; the ideal point sits at
// -ideal_offset in normalized units. The hinge is smoothed by a softplus of
// the given sharpness.
struct TrainingLoss {
  ConstraintSpec constraints;
  std::vector<double> lower;
  std::vector<double> scale;
  double ideal_offset = 0.05;
  double sharpness = 50.0;

  double softplus(double t) const;
  double smooth_penalized(double y, std::size_t j, double* dy) const;
};

// Mean loss over the rows of `prefs`; fills dL/dtheta.
double psl_loss(const ParetoSetModel& model, const Eigen::MatrixXd& prefs,
                const Surrogate& surrogate, const TrainingLoss& loss, std::vector<double>& grad);

struct TrainingOptions {
  std::size_t steps = 1000;
  std::size_t preference_batch = 10;
  AdamParams adam{};
};

// Adam on psl_loss with fresh simplex-uniform preferences each step.
// Returns the loss per step; TrainingError on a non-finite loss.
std::vector<double> train_pareto_set_model(ParetoSetModel& model, const Surrogate& surrogate,
                                           const TrainingLoss& loss,
                                           const TrainingOptions& options, Rng& rng);

Eigen::MatrixXd sample_preferences(std::size_t count, std::size_t m, Rng& rng);

// `count` solutions from uniform simplex preferences (rows).
Eigen::MatrixXd generate_candidates(const ParetoSetModel& model, std::size_t count, Rng& rng);

// Greedy batch selection by hypervolume improvement over `base` and the
// picks so far; ties (including zero improvement) go to the lowest index.
std::vector<std::size_t> greedy_hvi_select(const std::vector<ObjectiveVector>& candidates,
                                           const std::vector<ObjectiveVector>& base,
                                           std::size_t n, const ReferencePoint& z);

struct PslConfig {
  std::size_t generations = 20;  // T
  std::size_t batch = 5;         // N evaluations per generation
  std::size_t initial = 0;       // 0: max(5, d + 1)
  std::size_t candidates = 1000;
  TrainingOptions training{};
  std::size_t hidden = 64;
  double beta = 0.1;             // LCB exploration weight
  double ideal_offset = 0.05;
  double sharpness = 50.0;
  // Greedy HVI over penalized (true) or raw surrogate values.
  bool hvi_on_penalized = true;
  std::optional<KernelParams> kernel;  // fixed hyperparameters instead of the grid
  // MOFL-PSL: every penalty coefficient forced to 0.
  bool unconstrained_baseline = false;

  void validate() const;
};

struct PslDiagnostics {
  std::size_t generation = 0;
  std::vector<KernelParams> kernels;
  double final_loss = 0.0;
};

struct PslState {
  std::size_t generation = 0;
  Archive archive;
  std::uint64_t next_id = 0;
  std::vector<GenerationRecord> trace;
  std::vector<PslDiagnostics> diagnostics;
};

struct PslOptions {
  std::size_t dimension = 0;
  std::size_t objectives = 0;
  ReferencePoint reference;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::function<void(const PslState&)> on_generation;
  std::optional<PslState> resume;
};

struct PslResult {
  Archive archive;  // every evaluated solution, append-only
  std::vector<GenerationRecord> trace;
  std::vector<PslDiagnostics> diagnostics;
};

// Constrained PSL: per generation fit GPs on the archive, train the Pareto
// set model, screen candidates by penalized LCB, pick a batch by greedy HVI
// and evaluate it.
PslResult run_psl(const PslConfig& cfg, const ConstraintSpec& constraints,
                  const Evaluator& evaluator, const PslOptions& options);

}  // namespace cmofl::psl
