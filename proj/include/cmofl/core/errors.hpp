#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cmofl {

// Caller passed arguments that violate an operation's preconditions.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedDimension : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed on-disk data (IDX files, archives, fronts).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by an optimizer when the black-box evaluator fails; carries the
// offending solution so the run can be diagnosed.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, std::vector<double> genes)
      : std::runtime_error(what), genes_(std::move(genes)) {}

  const std::vector<double>& genes() const { return genes_; }

 private:
  std::vector<double> genes_;
};

}  // namespace cmofl
