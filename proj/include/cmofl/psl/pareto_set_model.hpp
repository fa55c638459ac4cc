#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cmofl/core/rng.hpp"

namespace cmofl::psl {

// Preference -> solution network: m -> hidden -> hidden -> d with tanh
// hidden layers and a sigmoid output, so every output lies in [0,1]^d.
// Parameters are one flat vector, per layer W (out x in, row-major) then b.
class ParetoSetModel {
 public:
  ParetoSetModel(std::size_t objectives, std::size_t dimension, std::size_t hidden = 64);

  // Uniform(+-1/sqrt(fan_in)) weights and biases; optionally zeroes the
  // output layer, which makes the network constant.
  void initialize(Rng& rng, bool zero_output_layer = false);

  std::size_t objectives() const { return widths_.front(); }
  std::size_t dimension() const { return widths_.back(); }
  std::size_t parameter_count() const { return theta_.size(); }
  std::vector<double>& parameters() { return theta_; }
  const std::vector<double>& parameters() const { return theta_; }

  // Rows of `prefs` are preferences; returns one solution per row.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& prefs) const;

  // Forward pass, then backpropagates dL/d(output) (same shape as the
  // output) into dL/d(theta).
  Eigen::MatrixXd forward_backward(const Eigen::MatrixXd& prefs,
                                   const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& output_grad,
                                   std::vector<double>& grad) const;

 private:
  std::vector<std::size_t> widths_;
  std::vector<double> theta_;
};

struct AdamParams {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t n, AdamParams p = {});
  void step(std::vector<double>& theta, const std::vector<double>& grad);

 private:
  AdamParams p_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace cmofl::psl
