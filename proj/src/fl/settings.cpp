#include "cmofl/fl/settings.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cmofl/core/errors.hpp"

namespace cmofl::fl {
namespace {

using Kind = VariableSpec::Kind;

std::vector<VariableSpec> variables_for(const SettingConfig& cfg) {
  const auto hmax = static_cast<double>(cfg.hidden_max);
  const VariableSpec lr{"lr", Kind::kReal, 0.01, 0.3, 0.3, {}};
  const VariableSpec h1{"hidden1", Kind::kInteger, 1, 256, hmax, {}};
  const VariableSpec h2{"hidden2", Kind::kInteger, 1, 256, hmax, {}};
  switch (cfg.setting) {
    case Setting::kRandomization:
      return {lr, {"sigma_rd", Kind::kReal, 0.0, 1.0, 1.0, {}},
              {"c_clip", Kind::kReal, 1.0, 4.0, 4.0, {}}};
    case Setting::kBatchCrypt:
      return {lr, h1, h2, {"bs", Kind::kCategorical, 100, 800, 800, {100, 200, 400, 800}}};
    case Setting::kSparsification:
      return {lr, h1, h2, {"rho", Kind::kReal, 0.0, 1.0, 1.0, {}},
              {"xi", Kind::kReal, 0.0, 0.99, 0.99, {}}};
  }
  return {};
}

std::string range_text(const VariableSpec& v) {
  std::ostringstream os;
  if (v.kind == Kind::kCategorical) {
    os << '{';
    for (std::size_t i = 0; i < v.choices.size(); ++i) os << (i ? ", " : "") << v.choices[i];
    os << '}';
  } else {
    os << '[' << v.lo << ", " << v.hi << ']';
  }
  return os.str();
}

}  // namespace

Setting parse_setting(const std::string& name) {
  if (name == "rd") return Setting::kRandomization;
  if (name == "bc") return Setting::kBatchCrypt;
  if (name == "sf") return Setting::kSparsification;
  throw ConfigError("unknown setting '" + name + "' (expected rd, bc or sf)");
}

std::string setting_name(Setting s) {
  switch (s) {
    case Setting::kRandomization: return "rd";
    case Setting::kBatchCrypt: return "bc";
    case Setting::kSparsification: return "sf";
  }
  return "";
}

FLProblem::FLProblem(SettingConfig cfg)
    : FLProblem(cfg, std::make_shared<const FederatedData>(load_dataset(cfg.dataset, cfg.clients))) {}

FLProblem::FLProblem(SettingConfig cfg, std::shared_ptr<const FederatedData> data)
    : cfg_(std::move(cfg)), data_(std::move(data)), variables_(variables_for(cfg_)) {
  if (cfg_.hidden_max < 1 || cfg_.hidden_max > 256) {
    throw ConfigError("hidden_max must be in [1, 256]");
  }
  if (data_->clients.size() != cfg_.clients) throw ConfigError("dataset client count mismatch");
  if (cfg_.constraints) cfg_.constraints->validate(objective_count());
  if (cfg_.reference && cfg_.reference->size() != objective_count()) {
    throw ConfigError("reference point needs " + std::to_string(objective_count()) + " values");
  }
}

std::size_t FLProblem::objective_count() const {
  return cfg_.setting == Setting::kSparsification ? 3 : 2;
}

std::vector<std::string> FLProblem::objective_names() const {
  switch (cfg_.setting) {
    case Setting::kRandomization: return {"utility_loss", "privacy_leakage"};
    case Setting::kBatchCrypt: return {"utility_loss", "training_cost"};
    case Setting::kSparsification: return {"utility_loss", "privacy_leakage", "training_cost"};
  }
  return {};
}

ConstraintSpec FLProblem::default_constraints() const {
  if (cfg_.constraints) return *cfg_.constraints;
  switch (cfg_.setting) {
    case Setting::kRandomization: return {{std::nullopt, 0.8}, {0.0, 20.0}};
    case Setting::kBatchCrypt: return {{std::nullopt, 500.0}, {0.0, 20.0}};
    case Setting::kSparsification:
      return {{std::nullopt, 0.8, std::nullopt}, {0.0, 20.0, 0.0}};
  }
  return ConstraintSpec::unconstrained(objective_count());
}

ReferencePoint FLProblem::default_reference() const {
  if (cfg_.reference) return *cfg_.reference;
  switch (cfg_.setting) {
    case Setting::kRandomization: return {1.0, 1.0};
    case Setting::kBatchCrypt: return {1.0, 1000.0};
    case Setting::kSparsification: {
      const ModelSpec widest{data_->features, {cfg_.hidden_max, cfg_.hidden_max}, data_->classes};
      return {1.0, 1.0, static_cast<double>(widest.parameter_count())};
    }
  }
  return {};
}

Assignment FLProblem::decode(std::span<const double> x) const {
  if (x.size() != variables_.size()) {
    throw InvalidInput(name() + ": expected " + std::to_string(variables_.size()) + " genes");
  }
  Assignment out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& v = variables_[i];
    const double u = std::clamp(x[i], 0.0, 1.0);
    switch (v.kind) {
      case Kind::kReal:
        out[v.name] = v.lo + u * (v.search_hi - v.lo);
        break;
      case Kind::kInteger: {
        const double span = v.search_hi - v.lo + 1.0;
        out[v.name] = v.lo + std::min(std::floor(u * span), span - 1.0);
        break;
      }
      case Kind::kCategorical: {
        const auto n = v.choices.size();
        const auto bin = std::min(static_cast<std::size_t>(u * static_cast<double>(n)), n - 1);
        out[v.name] = v.choices[bin];
        break;
      }
    }
  }
  return out;
}

void FLProblem::validate(const Assignment& values) const {
  for (const auto& v : variables_) {
    const auto it = values.find(v.name);
    if (it == values.end()) {
      throw ConfigError("missing variable '" + v.name + "' for setting " + name() +
                        ", range " + range_text(v));
    }
    const double x = it->second;
    bool ok = std::isfinite(x) && x >= v.lo && x <= v.hi;
    if (v.kind == Kind::kInteger) ok = ok && x == std::floor(x);
    if (v.kind == Kind::kCategorical) {
      ok = std::find(v.choices.begin(), v.choices.end(), x) != v.choices.end();
    }
    if (!ok) {
      std::ostringstream os;
      os << "variable '" << v.name << "' = " << x << " outside its range " << range_text(v);
      throw ConfigError(os.str());
    }
  }
  for (const auto& [key, _] : values) {
    const bool known = std::any_of(variables_.begin(), variables_.end(),
                                   [&](const VariableSpec& v) { return v.name == key; });
    if (!known) throw ConfigError("variable '" + key + "' does not apply to setting " + name());
  }
}

EvaluationResult FLProblem::run(const Assignment& values, std::uint64_t seed) const {
  validate(values);
  FLRunConfig run;
  run.rounds = cfg_.rounds;
  run.local_epochs = cfg_.local_epochs;
  run.batch_size = cfg_.batch_size;
  run.learning_rate = values.at("lr");
  run.seed = seed;
  run.weighting = cfg_.weighting;
  run.sparse_aggregation = cfg_.sparse_aggregation;
  run.cost_model = cfg_.cost_model;
  run.seconds_per_sample_parameter = cfg_.seconds_per_sample_parameter;
  run.model.inputs = data_->features;
  run.model.classes = data_->classes;
  if (cfg_.setting == Setting::kRandomization) {
    run.model.hidden = cfg_.rd_hidden;
  } else {
    run.model.hidden = {static_cast<std::size_t>(values.at("hidden1")),
                        static_cast<std::size_t>(values.at("hidden2"))};
  }

  Mechanism mechanism;
  switch (cfg_.setting) {
    case Setting::kRandomization:
      mechanism = protect::RandomizationParams{.sigma = values.at("sigma_rd"),
                                               .clip = values.at("c_clip"),
                                               .c1 = cfg_.c1,
                                               .dim = run.model.parameter_count()};
      break;
    case Setting::kBatchCrypt: {
      auto p = cfg_.batchcrypt;
      p.batch_size = static_cast<std::size_t>(values.at("bs"));
      p.clients = cfg_.clients;
      mechanism = p;
      break;
    }
    case Setting::kSparsification:
      mechanism = protect::SparsificationParams{
          .rho = values.at("rho"), .xi = values.at("xi"), .c2 = cfg_.c2};
      break;
  }
  return flo_evaluate(*data_, run, mechanism);
}

ObjectiveVector FLProblem::objectives(const EvaluationResult& r) const {
  switch (cfg_.setting) {
    case Setting::kRandomization: return {r.utility_loss, r.privacy_leakage};
    case Setting::kBatchCrypt: return {r.utility_loss, r.training_cost};
    case Setting::kSparsification: return {r.utility_loss, r.privacy_leakage, r.training_cost};
  }
  return {};
}

ObjectiveVector FLProblem::evaluate(std::span<const double> x, std::uint64_t seed) const {
  return objectives(run(decode(x), seed));
}

}  // namespace cmofl::fl
