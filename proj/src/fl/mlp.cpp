#include "cmofl/fl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmofl/core/errors.hpp"

namespace cmofl::fl {
namespace {

using ConstMap = Eigen::Map<const RowMatrix>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

struct Forward {
  std::vector<RowMatrix> activations;  // input rows, then each layer's output
};

RowMatrix gather(const Dataset& data, std::span<const std::size_t> rows) {
  RowMatrix x(static_cast<Eigen::Index>(rows.size()), data.x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    x.row(static_cast<Eigen::Index>(r)) = data.x.row(static_cast<Eigen::Index>(rows[r]));
  }
  return x;
}

// Activations of every layer; the last holds softmax probabilities.
Forward forward(const ModelSpec& spec, std::span<const double> params, RowMatrix x) {
  const auto w = spec.widths();
  Forward f;
  f.activations.push_back(std::move(x));
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(w[l]);
    const auto out = static_cast<Eigen::Index>(w[l + 1]);
    ConstMap weights(params.data() + off, out, in);
    off += w[l] * w[l + 1];
    ConstVecMap bias(params.data() + off, out);
    off += w[l + 1];
    RowMatrix z = f.activations.back() * weights.transpose();
    z.rowwise() += bias.transpose();
    if (l + 2 < w.size()) {
      z = z.cwiseMax(0.0);
    } else {
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double top = z.row(r).maxCoeff();
        z.row(r) = (z.row(r).array() - top).exp();
        z.row(r) /= z.row(r).sum();
      }
    }
    f.activations.push_back(std::move(z));
  }
  return f;
}

double cross_entropy(const RowMatrix& probs, const Dataset& data,
                     std::span<const std::size_t> rows) {
  double total = 0.0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double p = probs(static_cast<Eigen::Index>(r), data.labels[rows[r]]);
    total -= std::log(std::max(p, 1e-300));
  }
  return total / static_cast<double>(rows.size());
}

}  // namespace

std::vector<std::size_t> ModelSpec::widths() const {
  std::vector<std::size_t> w{inputs};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(classes);
  return w;
}

std::size_t ModelSpec::parameter_count() const {
  const auto w = widths();
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) n += w[l] * w[l + 1] + w[l + 1];
  return n;
}

std::vector<bool> ModelSpec::connection_layout() const {
  const auto w = widths();
  std::vector<bool> layout;
  layout.reserve(parameter_count());
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    layout.insert(layout.end(), w[l] * w[l + 1], true);
    layout.insert(layout.end(), w[l + 1], false);
  }
  return layout;
}

void ModelSpec::validate() const {
  if (inputs == 0 || classes < 2) throw ConfigError("model needs inputs >= 1 and classes >= 2");
  for (auto h : hidden) {
    if (h == 0) throw ConfigError("hidden layer widths must be >= 1");
  }
}

std::vector<double> init_parameters(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  const auto w = spec.widths();
  std::vector<double> params;
  params.reserve(spec.parameter_count());
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w[l] + w[l + 1]));
    std::uniform_real_distribution<double> unif(-limit, limit);
    for (std::size_t i = 0; i < w[l] * w[l + 1]; ++i) params.push_back(unif(rng));
    params.insert(params.end(), w[l + 1], 0.0);
  }
  return params;
}

double loss(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
            std::span<const std::size_t> rows) {
  const auto f = forward(spec, params, gather(data, rows));
  return cross_entropy(f.activations.back(), data, rows);
}

double loss_and_gradient(const ModelSpec& spec, std::span<const double> params,
                         const Dataset& data, std::span<const std::size_t> rows,
                         std::vector<double>& grad) {
  const auto w = spec.widths();
  const auto f = forward(spec, params, gather(data, rows));
  const double value = cross_entropy(f.activations.back(), data, rows);
  const auto n = static_cast<double>(rows.size());

  grad.assign(params.size(), 0.0);
  // dL/dz of the output layer: (softmax - onehot) / n
  RowMatrix delta = f.activations.back();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    delta(static_cast<Eigen::Index>(r), data.labels[rows[r]]) -= 1.0;
  }
  delta /= n;

  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    offsets.push_back(off);
    off += w[l] * w[l + 1] + w[l + 1];
  }
  for (std::size_t l = w.size() - 1; l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(w[l]);
    const auto out = static_cast<Eigen::Index>(w[l + 1]);
    Eigen::Map<RowMatrix> gw(grad.data() + offsets[l], out, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offsets[l] + w[l] * w[l + 1], out);
    gw.noalias() = delta.transpose() * f.activations[l];
    gb = delta.colwise().sum().transpose();
    if (l == 0) break;
    ConstMap weights(params.data() + offsets[l], out, in);
    RowMatrix back = delta * weights;
    // ReLU derivative on the previous layer's output.
    delta = back.array() * (f.activations[l].array() > 0.0).cast<double>();
  }
  return value;
}

double accuracy(const ModelSpec& spec, std::span<const double> params, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  const std::size_t chunk = 1024;
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < data.size(); start += chunk) {
    rows.resize(std::min(chunk, data.size() - start));
    std::iota(rows.begin(), rows.end(), start);
    const auto f = forward(spec, params, gather(data, rows));
    const auto& probs = f.activations.back();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      Eigen::Index best = 0;
      probs.row(static_cast<Eigen::Index>(r)).maxCoeff(&best);
      if (best == data.labels[rows[r]]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

LocalTrainResult local_sgd(const ModelSpec& spec, const Dataset& data,
                           std::span<const double> global, std::size_t epochs,
                           std::size_t batch, double lr, Rng& rng) {
  if (!(lr >= 0.0)) throw InvalidInput("local_sgd: learning rate must be >= 0");
  if (batch == 0) throw InvalidInput("local_sgd: batch size must be >= 1");
  LocalTrainResult res{std::vector<double>(global.begin(), global.end()), false};
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const auto rows = std::span<const std::size_t>(order).subspan(
          start, std::min(batch, order.size() - start));
      loss_and_gradient(spec, res.params, data, rows, grad);
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
          res.diverged = true;
          return res;
        }
        res.params[i] -= lr * grad[i];
      }
    }
  }
  for (double v : res.params) {
    if (!std::isfinite(v)) {
      res.diverged = true;
      break;
    }
  }
  return res;
}

}  // namespace cmofl::fl
