#include "cmofl/psl/psl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cmofl/core/errors.hpp"
#include "cmofl/core/hypervolume.hpp"

namespace cmofl::psl {
namespace {

constexpr std::uint64_t kInitStream = 0x50534c49;
constexpr std::uint64_t kModelStream = 0x50534c4d;
constexpr std::uint64_t kTrainStream = 0x50534c54;
constexpr std::uint64_t kCandidateStream = 0x50534c43;
constexpr std::uint64_t kEvalStream = 0x50534c45;

std::vector<ObjectiveVector> nondominated(const std::vector<ObjectiveVector>& ys) {
  std::vector<ObjectiveVector> out;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < ys.size() && !dominated; ++j) {
      dominated = j != i && (dominates(ys[j], ys[i]) || (ys[j] == ys[i] && j < i));
    }
    if (!dominated) out.push_back(ys[i]);
  }
  return out;
}

}  // namespace

double tchebycheff(std::span<const double> y, std::span<const double> lambda,
                   std::span<const double> ideal) {
  if (y.size() != lambda.size() || y.size() != ideal.size()) {
    throw InvalidInput("tchebycheff: dimension mismatch");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y.size(); ++i) best = std::max(best, lambda[i] * (y[i] - ideal[i]));
  return best;
}

Surrogate lcb_surrogate(std::vector<GPModel> gps, double beta) {
  return [gps = std::move(gps), beta](const Eigen::MatrixXd& xs, bool gradients) {
    SurrogateBatch out;
    out.values.resize(xs.rows(), static_cast<Eigen::Index>(gps.size()));
    for (std::size_t j = 0; j < gps.size(); ++j) {
      const auto post = gps[j].predict_batch(xs, gradients);
      out.values.col(static_cast<Eigen::Index>(j)) = post.mean - beta * post.std;
      if (gradients) out.grads.push_back(post.mean_grad - beta * post.std_grad);
    }
    return out;
  };
}

double TrainingLoss::softplus(double t) const {
  const double st = sharpness * t;
  return st > 0.0 ? t + std::log1p(std::exp(-st)) / sharpness : std::log1p(std::exp(st)) / sharpness;
}

double TrainingLoss::smooth_penalized(double y, std::size_t j, double* dy) const {
  const auto& bound = constraints.bounds[j];
  const double alpha = constraints.penalties[j];
  if (!bound || alpha == 0.0) {
    if (dy) *dy = 1.0;
    return y;
  }
  const double t = y - *bound;
  if (dy) *dy = 1.0 + alpha / (1.0 + std::exp(-sharpness * t));
  return y + alpha * softplus(t);
}

double psl_loss(const ParetoSetModel& model, const Eigen::MatrixXd& prefs,
                const Surrogate& surrogate, const TrainingLoss& loss, std::vector<double>& grad) {
  const Eigen::Index b = prefs.rows();
  const std::size_t m = model.objectives();
  double total = 0.0;
  model.forward_backward(
      prefs,
      [&](const Eigen::MatrixXd& xs) {
        const auto s = surrogate(xs, true);
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(xs.rows(), xs.cols());
        for (Eigen::Index r = 0; r < b; ++r) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t arg = 0;
          double arg_slope = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            double dy = 0.0;
            const double p = loss.smooth_penalized(s.values(r, static_cast<Eigen::Index>(j)), j, &dy);
            const double lam = prefs(r, static_cast<Eigen::Index>(j));
            const double v = lam * ((p - loss.lower[j]) / loss.scale[j] + loss.ideal_offset);
            if (v > best) {
              best = v;
              arg = j;
              arg_slope = lam * dy / loss.scale[j];
            }
          }
          total += best;
          g.row(r) = arg_slope * s.grads[arg].row(r) / static_cast<double>(b);
        }
        return g;
      },
      grad);
  return total / static_cast<double>(b);
}

Eigen::MatrixXd sample_preferences(std::size_t count, std::size_t m, Rng& rng) {
  Eigen::MatrixXd prefs(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < count; ++i) {
    const auto lam = sample_simplex(m, rng);
    for (std::size_t j = 0; j < m; ++j) {
      prefs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lam[j];
    }
  }
  return prefs;
}

std::vector<double> train_pareto_set_model(ParetoSetModel& model, const Surrogate& surrogate,
                                           const TrainingLoss& loss,
                                           const TrainingOptions& options, Rng& rng) {
  std::vector<double> trace;
  trace.reserve(options.steps);
  Adam adam(model.parameter_count(), options.adam);
  std::vector<double> grad;
  for (std::size_t step = 0; step < options.steps; ++step) {
    const auto prefs = sample_preferences(options.preference_batch, model.objectives(), rng);
    const double value = psl_loss(model, prefs, surrogate, loss, grad);
    if (!std::isfinite(value)) {
      std::ostringstream os;
      os << "Pareto set model training: non-finite loss at step " << step;
      if (!trace.empty()) os << " (previous loss " << trace.back() << ")";
      throw TrainingError(os.str());
    }
    trace.push_back(value);
    adam.step(model.parameters(), grad);
  }
  return trace;
}

Eigen::MatrixXd generate_candidates(const ParetoSetModel& model, std::size_t count, Rng& rng) {
  if (count == 0) throw InvalidInput("generate_candidates: count must be >= 1");
  return model.forward(sample_preferences(count, model.objectives(), rng));
}

std::vector<std::size_t> greedy_hvi_select(const std::vector<ObjectiveVector>& candidates,
                                           const std::vector<ObjectiveVector>& base,
                                           std::size_t n, const ReferencePoint& z) {
  if (n > candidates.size()) throw InvalidInput("greedy_hvi_select: N exceeds candidate count");
  std::vector<ObjectiveVector> front = nondominated(base);
  double current = hypervolume(front, z);
  std::vector<bool> taken(candidates.size(), false);
  std::vector<std::size_t> picks;
  while (picks.size() < n) {
    std::size_t best = candidates.size();
    double best_gain = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (taken[i]) continue;
      double gain = 0.0;
      const bool inside = count_outside_reference({candidates[i]}, z) == 0;
      const bool covered = std::any_of(front.begin(), front.end(), [&](const ObjectiveVector& f) {
        return dominates(f, candidates[i]) || f == candidates[i];
      });
      if (inside && !covered) {
        auto with = front;
        with.push_back(candidates[i]);
        gain = hypervolume(with, z) - current;
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = i;
      }
    }
    taken[best] = true;
    picks.push_back(best);
    if (best_gain > 0.0) {
      front.push_back(candidates[best]);
      front = nondominated(front);
      current = hypervolume(front, z);
    }
  }
  return picks;
}

void PslConfig::validate() const {
  if (batch == 0) throw ConfigError("psl: batch must be >= 1");
  if (candidates < batch) throw ConfigError("psl: candidate count must be >= batch");
  if (training.preference_batch == 0) throw ConfigError("psl: preference batch must be >= 1");
  if (!(training.adam.learning_rate > 0.0)) throw ConfigError("psl: learning rate must be > 0");
  if (initial == 1) throw ConfigError("psl: initial design needs >= 2 points");
  if (hidden == 0) throw ConfigError("psl: hidden width must be >= 1");
}

PslResult run_psl(const PslConfig& cfg, const ConstraintSpec& constraints_in,
                  const Evaluator& evaluator, const PslOptions& opt) {
  cfg.validate();
  if (opt.dimension == 0) throw InvalidInput("run_psl: dimension must be positive");
  constraints_in.validate(opt.objectives);
  const ConstraintSpec constraints =
      cfg.unconstrained_baseline ? constraints_in.without_penalties() : constraints_in;
  const std::size_t d = opt.dimension;
  const std::size_t m = opt.objectives;

  auto evaluate = [&](const std::vector<std::vector<double>>& xs, std::size_t t, PslState& s) {
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < xs.size(); ++i) seeds.push_back(derive_seed(opt.seed, {kEvalStream, t, i}));
    auto ys = evaluate_batch(evaluator, xs, seeds, m, opt.workers);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      s.archive.entries.push_back(make_entry(s.next_id++, t, xs[i], xs[i], std::move(ys[i]), constraints));
    }
  };

  PslState state;
  if (opt.resume) {
    state = *opt.resume;
  } else {
    const std::size_t n0 = cfg.initial ? cfg.initial : std::max<std::size_t>(5, d + 1);
    Rng rng = make_rng(opt.seed, {kInitStream});
    evaluate(latin_hypercube(n0, d, rng), 0, state);
    if (opt.on_generation) opt.on_generation(state);
  }

  for (std::size_t t = state.generation + 1; t <= cfg.generations; ++t) {
    const auto& entries = state.archive.entries;
    const auto rows = static_cast<Eigen::Index>(entries.size());
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(d));
    Eigen::MatrixXd y(rows, static_cast<Eigen::Index>(m));
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (std::size_t i = 0; i < d; ++i) x(r, static_cast<Eigen::Index>(i)) = entries[r].solution[i];
      for (std::size_t j = 0; j < m; ++j) y(r, static_cast<Eigen::Index>(j)) = entries[r].raw[j];
    }

    PslDiagnostics diag;
    diag.generation = t;
    std::vector<GPModel> gps;
    for (std::size_t j = 0; j < m; ++j) {
      gps.push_back(gp_fit(x, y.col(static_cast<Eigen::Index>(j)), cfg.kernel));
      diag.kernels.push_back(gps.back().params());
    }
    const Surrogate surrogate = lcb_surrogate(std::move(gps), cfg.beta);

    TrainingLoss loss;
    loss.constraints = constraints;
    loss.ideal_offset = cfg.ideal_offset;
    loss.sharpness = cfg.sharpness;
    for (std::size_t j = 0; j < m; ++j) {
      const double lo = y.col(static_cast<Eigen::Index>(j)).minCoeff();
      const double hi = y.col(static_cast<Eigen::Index>(j)).maxCoeff();
      loss.lower.push_back(lo);
      loss.scale.push_back(hi - lo > 1e-12 ? hi - lo : 1.0);
    }

    ParetoSetModel model(m, d, cfg.hidden);
    Rng model_rng = make_rng(opt.seed, {kModelStream, t});
    model.initialize(model_rng);
    Rng train_rng = make_rng(opt.seed, {kTrainStream, t});
    const auto losses = train_pareto_set_model(model, surrogate, loss, cfg.training, train_rng);
    diag.final_loss = losses.empty() ? 0.0 : losses.back();

    Rng cand_rng = make_rng(opt.seed, {kCandidateStream, t});
    const Eigen::MatrixXd cands = generate_candidates(model, cfg.candidates, cand_rng);
    const auto scores = surrogate(cands, false).values;
    std::vector<ObjectiveVector> cand_y(static_cast<std::size_t>(cands.rows()));
    for (Eigen::Index r = 0; r < cands.rows(); ++r) {
      ObjectiveVector v(m);
      for (std::size_t j = 0; j < m; ++j) v[j] = scores(r, static_cast<Eigen::Index>(j));
      cand_y[static_cast<std::size_t>(r)] = cfg.hvi_on_penalized ? penalize(v, constraints) : v;
    }
    std::vector<ObjectiveVector> base;
    for (const auto& e : entries) base.push_back(cfg.hvi_on_penalized ? e.penalized : e.raw);

    // Selection reference: just beyond the archive's worst values.
    ReferencePoint z(m);
    for (std::size_t j = 0; j < m; ++j) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& b : base) {
        lo = std::min(lo, b[j]);
        hi = std::max(hi, b[j]);
      }
      z[j] = hi + 0.1 * std::max(hi - lo, 1e-12);
    }
    const auto picks = greedy_hvi_select(cand_y, base, cfg.batch, z);

    std::vector<std::vector<double>> xs;
    for (std::size_t i : picks) {
      std::vector<double> sol(d);
      for (std::size_t k = 0; k < d; ++k) {
        sol[k] = cands(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      }
      xs.push_back(std::move(sol));
    }
    evaluate(xs, t, state);
    state.generation = t;
    state.archive.generation = t;
    state.trace.push_back(summarize_generation(t, state.archive.entries, opt.reference));
    state.diagnostics.push_back(std::move(diag));
    if (opt.on_generation) opt.on_generation(state);
  }

  return {state.archive, state.trace, state.diagnostics};
}

}  // namespace cmofl::psl
