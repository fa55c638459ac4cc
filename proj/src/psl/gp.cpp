#include "cmofl/psl/gp.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cmofl/core/errors.hpp"

namespace cmofl::psl {
namespace {

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const KernelParams& p) {
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose()).colwise() + an;
  d2.rowwise() += bn.transpose();
  const double inv = 1.0 / (2.0 * p.length_scale * p.length_scale);
  return (p.signal_variance * (-d2.cwiseMax(0.0) * inv).array().exp()).matrix();
}

}  // namespace

double se_kernel(std::span<const double> a, std::span<const double> b, const KernelParams& p) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return p.signal_variance * std::exp(-d2 / (2.0 * p.length_scale * p.length_scale));
}

GPModel gp_fit_fixed(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelParams& p) {
  if (x.rows() == 0 || x.rows() != y.size()) throw InvalidInput("gp_fit: need n >= 1 rows and n targets");
  if (!(p.length_scale > 0.0 && p.signal_variance > 0.0 && p.noise_variance >= 0.0)) {
    throw InvalidInput("gp_fit: kernel parameters must be positive");
  }
  if (!x.allFinite() || !y.allFinite()) throw InvalidInput("gp_fit: non-finite training data");

  GPModel g;
  g.x_ = x;
  g.params_ = p;
  const double n = static_cast<double>(y.size());
  g.y_mean_ = y.mean();
  const double var = y.size() > 1 ? (y.array() - g.y_mean_).square().sum() / (n - 1.0) : 0.0;
  g.y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
  const Eigen::VectorXd ys = (y.array() - g.y_mean_) / g.y_scale_;

  const Eigen::MatrixXd k = kernel_matrix(x, x, p);
  const Eigen::Index rows = x.rows();
  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += p.noise_variance + jitter;
    g.llt_.compute(kn);
    if (g.llt_.info() == Eigen::Success) break;
    jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
    if (jitter > 1e-4 * (1 + 1e-9)) {
      throw FitError("gp_fit: kernel matrix not positive definite after jitter 1e-4 (n=" +
                     std::to_string(rows) + ", length scale " + std::to_string(p.length_scale) +
                     ")");
    }
  }
  g.jitter_ = jitter;
  g.alpha_ = g.llt_.solve(ys);
  const Eigen::MatrixXd l = g.llt_.matrixL();
  g.lml_ = -0.5 * ys.dot(g.alpha_) - l.diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * std::numbers::pi);
  return g;
}

GPModel gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const std::optional<KernelParams>& hyper, const HyperGrid& grid) {
  if (hyper) return gp_fit_fixed(x, y, *hyper);
  const double scale = std::sqrt(static_cast<double>(std::max<Eigen::Index>(x.cols(), 1)));
  std::optional<GPModel> best;
  for (double l : grid.length_scales) {
    for (double s : grid.signal_variances) {
      for (double nv : grid.noise_variances) {
        GPModel g;
        try {
          g = gp_fit_fixed(x, y, {l * scale, s, nv});
        } catch (const FitError&) {
          continue;
        }
        if (!best || g.log_marginal_likelihood() > best->log_marginal_likelihood()) best = std::move(g);
      }
    }
  }
  if (!best) throw FitError("gp_fit: no grid point gave a positive definite kernel matrix");
  return *best;
}

Posterior GPModel::predict(std::span<const double> x) const {
  Eigen::MatrixXd q(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) q(0, static_cast<Eigen::Index>(i)) = x[i];
  const auto b = predict_batch(q, false);
  return {b.mean(0), b.std(0)};
}

PosteriorBatch GPModel::predict_batch(const Eigen::MatrixXd& xs, bool gradients) const {
  if (xs.cols() != x_.cols()) throw InvalidInput("gp predict: query dimension mismatch");
  const Eigen::MatrixXd ks = kernel_matrix(xs, x_, params_);  // B x n
  PosteriorBatch out;
  out.mean = (ks * alpha_).array() * y_scale_ + y_mean_;
  const Eigen::MatrixXd v = llt_.solve(ks.transpose());  // n x B
  Eigen::VectorXd var = params_.signal_variance - (ks.transpose().array() * v.array()).colwise().sum().transpose();
  var = var.cwiseMax(0.0);
  out.std = var.cwiseSqrt() * y_scale_;
  if (!gradients) return out;

  const Eigen::Index b = xs.rows();
  const Eigen::Index d = xs.cols();
  const double inv_l2 = 1.0 / (params_.length_scale * params_.length_scale);
  out.mean_grad.resize(b, d);
  out.std_grad.resize(b, d);
  for (Eigen::Index q = 0; q < b; ++q) {
    // dk_i/dx = -k_i (x - x_i) / l^2
    const Eigen::MatrixXd diff = (-x_).rowwise() + xs.row(q);  // n x d
    const Eigen::VectorXd kq = ks.row(q).transpose();
    const Eigen::MatrixXd dk = (diff.array().colwise() * (-kq.array() * inv_l2)).matrix();
    out.mean_grad.row(q) = (dk.transpose() * alpha_).transpose() * y_scale_;
    const double sd = std::sqrt(var(q));
    if (sd > 1e-12) {
      // d var / dx = -2 dk^T K^{-1} k
      const Eigen::VectorXd dvar = -2.0 * (dk.transpose() * v.col(q));
      out.std_grad.row(q) = (dvar / (2.0 * sd)).transpose() * y_scale_;
    } else {
      out.std_grad.row(q).setZero();
    }
  }
  return out;
}

}  // namespace cmofl::psl
