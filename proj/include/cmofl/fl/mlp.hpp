#pragma once

#include <span>
#include <vector>

#include "cmofl/core/rng.hpp"
#include "cmofl/fl/dataset.hpp"

namespace cmofl::fl {

// Fully-connected ReLU network with a softmax output layer. Parameters are
// one flat vector: per layer the weight matrix (out x in, row-major) and
// then the bias vector.
struct ModelSpec {
  std::size_t inputs = 0;
  std::vector<std::size_t> hidden;  // two hidden layers in every setting here
  std::size_t classes = 0;

  std::vector<std::size_t> widths() const;  // inputs, hidden..., classes
  std::size_t parameter_count() const;
  // true for weight-matrix entries (connections), false for biases
  std::vector<bool> connection_layout() const;
  void validate() const;
};

// Glorot-uniform weights, zero biases.
std::vector<double> init_parameters(const ModelSpec& spec, Rng& rng);

// Mean softmax cross-entropy over the given rows of `data`.
double loss(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
            std::span<const std::size_t> rows);

// Loss and its gradient with respect to every parameter.
double loss_and_gradient(const ModelSpec& spec, std::span<const double> params,
                         const Dataset& data, std::span<const std::size_t> rows,
                         std::vector<double>& grad);

double accuracy(const ModelSpec& spec, std::span<const double> params, const Dataset& data);

struct LocalTrainResult {
  std::vector<double> params;
  bool diverged = false;
};

// Minibatch SGD for `epochs` passes over `data`, reshuffled each epoch from rng.
LocalTrainResult local_sgd(const ModelSpec& spec, const Dataset& data,
                           std::span<const double> global, std::size_t epochs,
                           std::size_t batch, double lr, Rng& rng);

}  // namespace cmofl::fl
