#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmofl/core/problem.hpp"
#include "cmofl/fl/dataset.hpp"
#include "cmofl/fl/flo.hpp"

namespace cmofl::fl {

// The three protection settings: randomization (utility vs privacy),
// BatchCrypt (utility vs cost) and sparsification (all three).
enum class Setting { kRandomization, kBatchCrypt, kSparsification };

Setting parse_setting(const std::string& name);  // "rd" | "bc" | "sf"
std::string setting_name(Setting s);

struct VariableSpec {
  enum class Kind { kReal, kInteger, kCategorical };
  std::string name;
  Kind kind = Kind::kReal;
  double lo = 0.0;  // admissible range for explicit values
  double hi = 1.0;
  double search_hi = 1.0;        // upper end of the gene mapping (integers)
  std::vector<double> choices;   // categorical values
};

struct SettingConfig {
  Setting setting = Setting::kRandomization;
  DatasetSpec dataset = SyntheticSpec{};
  std::size_t clients = 5;
  std::size_t rounds = 10;
  std::size_t local_epochs = 5;
  std::size_t batch_size = 64;
  ServerWeighting weighting = ServerWeighting::kUniform;
  SparseAggregation sparse_aggregation = SparseAggregation::kSharedMean;
  bool cost_model = true;
  double seconds_per_sample_parameter = 2e-9;

  std::size_t hidden_max = 32;                   // search range of hidden widths
  std::vector<std::size_t> rd_hidden{16, 16};    // fixed model in the rd setting
  double c1 = 1.0;
  double c2 = 8.0;
  protect::BatchCryptParams batchcrypt{.payload_bits = 8192};

  std::optional<ConstraintSpec> constraints;     // defaults per setting when unset
  std::optional<ReferencePoint> reference;
};

using Assignment = std::map<std::string, double>;

class FLProblem : public Problem {
 public:
  explicit FLProblem(SettingConfig cfg);
  FLProblem(SettingConfig cfg, std::shared_ptr<const FederatedData> data);

  std::string name() const override { return setting_name(cfg_.setting); }
  std::size_t dimension() const override { return variables_.size(); }
  std::size_t objective_count() const override;
  std::vector<std::string> objective_names() const override;
  ObjectiveVector evaluate(std::span<const double> x, std::uint64_t seed) const override;
  ConstraintSpec default_constraints() const override;
  ReferencePoint default_reference() const override;

  const std::vector<VariableSpec>& variables() const { return variables_; }
  const SettingConfig& config() const { return cfg_; }

  // Gene vector in [0,1]^d to named hyperparameter values.
  Assignment decode(std::span<const double> x) const;
  // Throws ConfigError naming the variable and its admissible range.
  void validate(const Assignment& values) const;
  EvaluationResult run(const Assignment& values, std::uint64_t seed) const;
  ObjectiveVector objectives(const EvaluationResult& r) const;

 private:
  SettingConfig cfg_;
  std::shared_ptr<const FederatedData> data_;
  std::vector<VariableSpec> variables_;
};

}  // namespace cmofl::fl
