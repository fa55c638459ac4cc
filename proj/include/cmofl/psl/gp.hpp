#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cmofl::psl {

// Squared-exponential kernel s * exp(-|a - b|^2 / (2 l^2)), in standardized
// target units.
struct KernelParams {
  double length_scale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
};

struct Posterior {
  double mean = 0.0;
  double std = 0.0;
};

// Batched posterior of the latent function with input gradients.
struct PosteriorBatch {
  Eigen::VectorXd mean;       // B
  Eigen::VectorXd std;        // B
  Eigen::MatrixXd mean_grad;  // B x d
  Eigen::MatrixXd std_grad;   // B x d
};

class GPModel {
 public:
  const KernelParams& params() const { return params_; }
  double jitter() const { return jitter_; }
  double log_marginal_likelihood() const { return lml_; }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }
  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(x_.cols()); }

  Posterior predict(std::span<const double> x) const;
  // Rows of `xs` are query points.
  PosteriorBatch predict_batch(const Eigen::MatrixXd& xs, bool gradients) const;

 private:
  friend GPModel gp_fit_fixed(const Eigen::MatrixXd&, const Eigen::VectorXd&, const KernelParams&);

  Eigen::MatrixXd x_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  KernelParams params_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
};

double se_kernel(std::span<const double> a, std::span<const double> b, const KernelParams& p);

// Exact GP regression on standardized targets. Jitter is escalated up to
// 1e-4 if the kernel matrix is not positive definite; FitError beyond that.
GPModel gp_fit_fixed(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelParams& p);

struct HyperGrid {
  std::vector<double> length_scales{0.05, 0.1, 0.2, 0.5, 1.0};  // times sqrt(d)
  std::vector<double> signal_variances{0.25, 0.5, 1.0, 2.0, 4.0};
  std::vector<double> noise_variances{1e-6, 1e-4, 1e-2};
};

// Fits with `hyper` if given, otherwise picks the grid point with the
// highest log marginal likelihood (first in grid order on ties).
GPModel gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const std::optional<KernelParams>& hyper = std::nullopt,
               const HyperGrid& grid = {});

}  // namespace cmofl::psl
