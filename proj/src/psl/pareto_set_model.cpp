#include "cmofl/psl/pareto_set_model.hpp"

#include <cmath>

#include "cmofl/core/errors.hpp"

namespace cmofl::psl {
namespace {

using RowMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using RowMapMut = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

}  // namespace

ParetoSetModel::ParetoSetModel(std::size_t objectives, std::size_t dimension, std::size_t hidden)
    : widths_{objectives, hidden, hidden, dimension} {
  if (objectives < 2 || dimension < 1 || hidden < 1) {
    throw InvalidInput("ParetoSetModel: need m >= 2, d >= 1 and hidden >= 1");
  }
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) n += widths_[l + 1] * (widths_[l] + 1);
  theta_.assign(n, 0.0);
}

void ParetoSetModel::initialize(Rng& rng, bool zero_output_layer) {
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    const std::size_t count = widths_[l + 1] * (widths_[l] + 1);
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
    std::uniform_real_distribution<double> unif(-bound, bound);
    const bool last = l + 2 == widths_.size();
    for (std::size_t i = 0; i < count; ++i) {
      theta_[off + i] = (last && zero_output_layer) ? 0.0 : unif(rng);
    }
    off += count;
  }
}

Eigen::MatrixXd ParetoSetModel::forward(const Eigen::MatrixXd& prefs) const {
  std::vector<double> unused;
  return forward_backward(prefs, nullptr, unused);
}

Eigen::MatrixXd ParetoSetModel::forward_backward(
    const Eigen::MatrixXd& prefs,
    const std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>& output_grad,
    std::vector<double>& grad) const {
  if (static_cast<std::size_t>(prefs.cols()) != objectives()) {
    throw InvalidInput("ParetoSetModel: preference width mismatch");
  }
  const std::size_t layers = widths_.size() - 1;
  // activations[l]: B x widths_[l], column-major; samples as rows
  std::vector<Eigen::MatrixXd> acts{prefs};
  std::size_t off = 0;
  std::vector<std::size_t> offsets;
  for (std::size_t l = 0; l < layers; ++l) {
    const auto in = static_cast<Eigen::Index>(widths_[l]);
    const auto out = static_cast<Eigen::Index>(widths_[l + 1]);
    offsets.push_back(off);
    RowMap w(theta_.data() + off, out, in);
    Eigen::Map<const Eigen::VectorXd> b(theta_.data() + off + out * in, out);
    Eigen::MatrixXd z = acts.back() * w.transpose();
    z.rowwise() += b.transpose();
    if (l + 1 < layers) {
      acts.push_back(z.array().tanh().matrix());
    } else {
      acts.push_back((1.0 / (1.0 + (-z.array()).exp())).matrix());
    }
    off += static_cast<std::size_t>(out * (in + 1));
  }
  if (!output_grad) return acts.back();

  grad.assign(theta_.size(), 0.0);
  const Eigen::MatrixXd& y = acts.back();
  Eigen::MatrixXd delta = output_grad(y);
  delta = (delta.array() * y.array() * (1.0 - y.array())).matrix();
  for (std::size_t l = layers; l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(widths_[l]);
    const auto out = static_cast<Eigen::Index>(widths_[l + 1]);
    RowMapMut gw(grad.data() + offsets[l], out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets[l] + out * in, out);
    gw = delta.transpose() * acts[l];
    gb = delta.colwise().sum().transpose();
    if (l > 0) {
      RowMap w(theta_.data() + offsets[l], out, in);
      delta = ((delta * w).array() * (1.0 - acts[l].array().square())).matrix();
    }
  }
  return y;
}

Adam::Adam(std::size_t n, AdamParams p) : p_(p), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::vector<double>& theta, const std::vector<double>& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(p_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(p_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m_[i] = p_.beta1 * m_[i] + (1.0 - p_.beta1) * grad[i];
    v_[i] = p_.beta2 * v_[i] + (1.0 - p_.beta2) * grad[i] * grad[i];
    theta[i] -= p_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + p_.epsilon);
  }
}

}  // namespace cmofl::psl
