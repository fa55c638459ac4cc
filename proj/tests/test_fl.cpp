#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "cmofl/core/errors.hpp"
#include "cmofl/core/rng.hpp"
#include "cmofl/fl/dataset.hpp"
#include "cmofl/fl/flo.hpp"
#include "cmofl/fl/mlp.hpp"
#include "cmofl/fl/settings.hpp"
#include "doctest.h"

using namespace cmofl;
using namespace cmofl::fl;

namespace {

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::filesystem::path write_bytes(const std::string& name, const std::vector<std::uint8_t>& b) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(b.data()),
                                              static_cast<std::streamsize>(b.size()));
  return path;
}

std::vector<std::uint8_t> idx_images(std::uint32_t n, std::uint32_t rows, std::uint32_t cols) {
  std::vector<std::uint8_t> b{0, 0, 0x08, 3};
  put_be32(b, n);
  put_be32(b, rows);
  put_be32(b, cols);
  for (std::uint32_t i = 0; i < n * rows * cols; ++i) b.push_back(static_cast<std::uint8_t>(i % 256));
  return b;
}

std::vector<std::uint8_t> idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> b{0, 0, 0x08, 1};
  put_be32(b, static_cast<std::uint32_t>(labels.size()));
  b.insert(b.end(), labels.begin(), labels.end());
  return b;
}

FederatedData small_data(std::size_t clients, std::size_t per_client) {
  SyntheticSpec s;
  s.per_client = per_client;
  s.test = 1000;
  return load_dataset(s, clients);
}

// Full-batch gradient descent on binary logistic regression.
double logistic_oracle_accuracy(const FederatedData& fd) {
  const std::size_t d = fd.features;
  std::vector<double> w(d + 1, 0.0);
  for (int it = 0; it < 300; ++it) {
    std::vector<double> g(d + 1, 0.0);
    std::size_t n = 0;
    for (const auto& c : fd.clients) {
      for (std::size_t i = 0; i < c.size(); ++i, ++n) {
        double z = w[d];
        for (std::size_t j = 0; j < d; ++j) z += w[j] * c.x(i, j);
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double err = p - (c.labels[i] == 1 ? 1.0 : 0.0);
        for (std::size_t j = 0; j < d; ++j) g[j] += err * c.x(i, j);
        g[d] += err;
      }
    }
    for (std::size_t j = 0; j <= d; ++j) w[j] -= 0.5 * g[j] / static_cast<double>(n);
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < fd.test.size(); ++i) {
    double z = w[d];
    for (std::size_t j = 0; j < d; ++j) z += w[j] * fd.test.x(i, j);
    correct += (z > 0 ? 1 : 0) == fd.test.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(fd.test.size());
}

}  // namespace

TEST_CASE("synthetic partitions are exact and disjoint") {
  const auto fd = load_dataset(SyntheticSpec{}, 5);
  REQUIRE(fd.clients.size() == 5);
  std::set<std::vector<double>> rows;
  for (const auto& c : fd.clients) {
    CHECK(c.size() == 1000);
    for (Eigen::Index i = 0; i < c.x.rows(); ++i) {
      rows.insert(std::vector<double>(c.x.row(i).data(), c.x.row(i).data() + c.x.cols()));
    }
  }
  CHECK(rows.size() == 5000);
  CHECK(fd.test.size() == 2000);
}

TEST_CASE("IID partition histograms track the global histogram") {
  const auto fd = load_dataset(SyntheticSpec{}, 5);
  double global = 0.0;
  for (const auto& c : fd.clients) global += std::count(c.labels.begin(), c.labels.end(), 1);
  global /= 5000.0;
  for (const auto& c : fd.clients) {
    const double share = std::count(c.labels.begin(), c.labels.end(), 1) / 1000.0;
    CHECK(std::abs(share - global) <= 0.05);
  }
}

TEST_CASE("IDX files parse and header counts match") {
  const auto img = idx_images(6, 3, 2);
  const auto lab = idx_labels({0, 1, 2, 3, 4, 9});
  // independent byte-level header read
  const std::uint32_t n = (img[4] << 24) | (img[5] << 16) | (img[6] << 8) | img[7];
  CHECK(img[2] == 0x08);
  CHECK(img[3] == 3);
  CHECK(n == 6);

  const auto arr = parse_idx(img, "mem");
  CHECK(arr.dims == std::vector<std::uint32_t>{6, 3, 2});
  CHECK(arr.data.size() == 36);

  const auto ip = write_bytes("cmofl_test_img.idx", img);
  const auto lp = write_bytes("cmofl_test_lab.idx", lab);
  const auto d = read_idx_dataset(ip.string(), lp.string(), 10);
  CHECK(d.size() == n);
  CHECK(d.features() == 6);
  CHECK(d.labels.back() == 9);
  CHECK(d.x(1, 0) == doctest::Approx(6.0 / 255.0));
  CHECK(read_idx_dataset(ip.string(), lp.string(), 10, 4).size() == 4);

  const auto bad = write_bytes("cmofl_test_badlab.idx", idx_labels({0, 1, 2, 3, 4, 10}));
  CHECK_THROWS_AS(read_idx_dataset(ip.string(), bad.string(), 10), FormatError);
  std::filesystem::remove(ip);
  std::filesystem::remove(lp);
  std::filesystem::remove(bad);
}

TEST_CASE("malformed IDX headers name the offset") {
  auto img = idx_images(2, 2, 2);
  auto wrong_magic = img;
  wrong_magic[1] = 7;
  try {
    parse_idx(wrong_magic, "x");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
  }
  auto wrong_type = img;
  wrong_type[2] = 0x0D;
  try {
    parse_idx(wrong_type, "x");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("offset 2") != std::string::npos);
  }
  img.pop_back();
  CHECK_THROWS_AS(parse_idx(img, "x"), FormatError);
  CHECK_THROWS_AS(parse_idx({0, 0, 8}, "x"), FormatError);
  CHECK_THROWS_AS(parse_idx({0, 0, 8, 3, 0, 0}, "x"), FormatError);
}

TEST_CASE("model layout") {
  const ModelSpec spec{.inputs = 4, .hidden = {3, 2}, .classes = 2};
  CHECK(spec.parameter_count() == 4 * 3 + 3 + 3 * 2 + 2 + 2 * 2 + 2);
  const auto layout = spec.connection_layout();
  CHECK(std::count(layout.begin(), layout.end(), true) == 12 + 6 + 4);
  CHECK_FALSE(layout[12]);
  CHECK(layout[15]);
  CHECK_THROWS_AS((ModelSpec{.inputs = 4, .hidden = {0, 2}, .classes = 2}.validate()), ConfigError);
}

TEST_CASE("gradient matches central differences on a 3-sample batch") {
  const ModelSpec spec{.inputs = 5, .hidden = {4, 3}, .classes = 3};
  SyntheticSpec s{.features = 5, .classes = 3};
  const Dataset data = make_synthetic(s, 3, 99);
  Rng rng(4);
  auto params = init_parameters(spec, rng);
  std::normal_distribution<double> g(0.0, 0.1);
  for (auto& p : params) p += g(rng);  // nonzero biases, away from ReLU kinks
  const std::vector<std::size_t> rows{0, 1, 2};
  std::vector<double> grad;
  loss_and_gradient(spec, params, data, rows, grad);
  const double h = 1e-6;
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto plus = params;
    auto minus = params;
    plus[i] += h;
    minus[i] -= h;
    const double fd = (loss(spec, plus, data, rows) - loss(spec, minus, data, rows)) / (2 * h);
    CHECK(std::abs(fd - grad[i]) <= 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("local_sgd edge cases") {
  const auto fd = small_data(1, 200);
  const ModelSpec spec{.inputs = 20, .hidden = {8, 8}, .classes = 2};
  Rng init(1);
  const auto w0 = init_parameters(spec, init);
  Rng rng(2);
  CHECK(local_sgd(spec, fd.clients[0], w0, 3, 64, 0.0, rng).params == w0);
  CHECK_THROWS_AS(local_sgd(spec, fd.clients[0], w0, 1, 64, -0.1, rng), InvalidInput);

  std::vector<std::size_t> all(fd.clients[0].size());
  std::iota(all.begin(), all.end(), 0);
  const double before = loss(spec, w0, fd.clients[0], all);
  const auto after = local_sgd(spec, fd.clients[0], w0, 1, all.size(), 1e-3, rng);
  CHECK(loss(spec, after.params, fd.clients[0], all) <= before);

  const auto blown = local_sgd(spec, fd.clients[0], w0, 5, 8, 1e300, rng);
  CHECK(blown.diverged);
}

TEST_CASE("fedavg") {
  const std::vector<double> a{1.0, -2.0, 3.0};
  CHECK(fedavg({a, a, a}) == a);
  CHECK(fedavg({{0.0, 0.0}, {2.0, 2.0}}) == std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(fedavg({{0.0}, {1.0, 2.0}}), InvalidInput);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::vector<double>> models(5, std::vector<double>(50));
  for (auto& m : models)
    for (auto& x : m) x = u(rng);
  const auto avg = fedavg(models);
  for (std::size_t i = 0; i < 50; ++i) {
    long double s = 0;
    for (const auto& m : models) s += m[i];
    CHECK(std::abs(avg[i] - static_cast<double>(s / 5)) <= 1e-12);
  }
}

TEST_CASE("no communication rounds") {
  const auto fd = small_data(3, 100);
  FLRunConfig cfg;
  cfg.rounds = 0;
  cfg.model = {.inputs = 20, .hidden = {4, 4}, .classes = 2};
  cfg.seed = 8;
  const auto r = flo_evaluate(fd, cfg, protect::RandomizationParams{.sigma = 0.2, .clip = 2.0});
  CHECK(r.training_cost == 0.0);
  CHECK(r.privacy_leakage == 0.0);
  FLRunConfig again = cfg;
  const auto r2 = flo_evaluate(fd, again, NoProtection{});
  CHECK(r.utility_loss == r2.utility_loss);
  CHECK(r.utility_loss >= 0.0);
  CHECK(r.utility_loss <= 1.0);
}

TEST_CASE("single client equals centralized SGD") {
  const auto fd = small_data(1, 300);
  FLRunConfig cfg;
  cfg.rounds = 3;
  cfg.local_epochs = 2;
  cfg.model = {.inputs = 20, .hidden = {6, 5}, .classes = 2};
  cfg.seed = 21;
  const auto r = flo_evaluate(fd, cfg, NoProtection{});

  // replay: same init stream, one continuous training run split by round seeds
  FLRunConfig zero = cfg;
  zero.rounds = 0;
  const auto init_err = flo_evaluate(fd, zero, NoProtection{}).utility_loss;
  Rng init = make_rng(cfg.seed, {0x494e4954});
  auto w = init_parameters(cfg.model, init);
  CHECK(1.0 - accuracy(cfg.model, w, fd.test) == init_err);
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    Rng rng(local_training_seed(cfg.seed, round, 0));
    w = local_sgd(cfg.model, fd.clients[0], w, cfg.local_epochs, cfg.batch_size,
                  cfg.learning_rate, rng)
            .params;
  }
  CHECK(r.utility_loss == 1.0 - accuracy(cfg.model, w, fd.test));
  CHECK(r.round_test_error.back() == r.utility_loss);
}

TEST_CASE("unprotected federated training reaches high accuracy") {
  const auto fd = load_dataset(SyntheticSpec{}, 5);
  CHECK(logistic_oracle_accuracy(fd) >= 0.99);
  FLRunConfig cfg;
  cfg.model = {.inputs = 20, .hidden = {16, 16}, .classes = 2};
  cfg.seed = 1;
  const auto r = flo_evaluate(fd, cfg, NoProtection{});
  CHECK_FALSE(r.diverged);
  CHECK(r.utility_loss <= 0.05);
  CHECK(r.privacy_leakage == 1.0);
  CHECK(r.round_leakage.size() == 10);
}

TEST_CASE("mechanism objectives are aggregated per round") {
  const auto fd = small_data(5, 200);
  FLRunConfig cfg;
  cfg.rounds = 4;
  cfg.model = {.inputs = 20, .hidden = {8, 8}, .classes = 2};
  cfg.seed = 5;
  const std::size_t dim = cfg.model.parameter_count();

  const auto rd = flo_evaluate(fd, cfg, protect::RandomizationParams{.sigma = 0.05, .clip = 2.0});
  CHECK(rd.privacy_leakage ==
        doctest::Approx(protect::rd_leakage({.sigma = 0.05, .clip = 2.0, .dim = dim})));

  protect::BatchCryptParams bc{.batch_size = 100};
  const auto b = flo_evaluate(fd, cfg, bc);
  const double train = cfg.seconds_per_sample_parameter * 5 * 200 * static_cast<double>(dim);
  bc.clients = 5;
  CHECK(b.training_cost ==
        doctest::Approx(4 * protect::bc_cost(dim, bc, std::vector<double>(5, train))));
  CHECK(b.privacy_leakage == 0.0);
  CHECK(b.utility_loss < 0.2);

  const auto all = flo_evaluate(fd, cfg, protect::SparsificationParams{.rho = 1.0, .xi = 0.0});
  const auto none_cfg = flo_evaluate(fd, cfg, NoProtection{});
  CHECK(all.training_cost == static_cast<double>(dim));
  CHECK(all.privacy_leakage == 1.0);
  CHECK(all.utility_loss == none_cfg.utility_loss);

  const auto sparse = flo_evaluate(fd, cfg, protect::SparsificationParams{.rho = 0.5, .xi = 0.5});
  CHECK(sparse.training_cost < static_cast<double>(dim));
  CHECK(sparse.privacy_leakage < 1.0);
  for (double v : sparse.round_leakage) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("divergence forces full utility loss") {
  const auto fd = small_data(2, 100);
  FLRunConfig cfg;
  cfg.rounds = 2;
  cfg.model = {.inputs = 20, .hidden = {4, 4}, .classes = 2};
  cfg.learning_rate = 1e300;
  const auto r = flo_evaluate(fd, cfg, NoProtection{});
  CHECK(r.diverged);
  CHECK(r.utility_loss == 1.0);
}

TEST_CASE("evaluation is deterministic") {
  const auto fd = small_data(3, 150);
  FLRunConfig cfg;
  cfg.rounds = 3;
  cfg.model = {.inputs = 20, .hidden = {5, 7}, .classes = 2};
  cfg.seed = 77;
  const protect::SparsificationParams sf{.rho = 0.6, .xi = 0.3};
  const auto a = flo_evaluate(fd, cfg, sf);
  const auto b = flo_evaluate(fd, cfg, sf);
  CHECK(a.utility_loss == b.utility_loss);
  CHECK(a.round_leakage == b.round_leakage);
  CHECK(a.round_cost == b.round_cost);
}

namespace {

SettingConfig desk(Setting s) {
  SettingConfig cfg;
  cfg.setting = s;
  cfg.dataset = SyntheticSpec{.per_client = 100, .test = 500};
  cfg.rounds = 2;
  cfg.local_epochs = 1;
  cfg.hidden_max = 8;
  cfg.rd_hidden = {4, 4};
  return cfg;
}

}  // namespace

TEST_CASE("setting shapes") {
  const FLProblem rd(desk(Setting::kRandomization));
  const FLProblem bc(desk(Setting::kBatchCrypt));
  const FLProblem sf(desk(Setting::kSparsification));
  CHECK(rd.dimension() == 3);
  CHECK(bc.dimension() == 4);
  CHECK(sf.dimension() == 5);
  CHECK(rd.objective_count() == 2);
  CHECK(sf.objective_count() == 3);
  CHECK(rd.default_constraints().bounds[1] == 0.8);
  CHECK(bc.default_constraints().bounds[1] == 500.0);
  CHECK(sf.default_constraints().penalties == std::vector<double>{0.0, 20.0, 0.0});
  const ModelSpec widest{.inputs = 20, .hidden = {8, 8}, .classes = 2};
  CHECK(sf.default_reference()[2] == static_cast<double>(widest.parameter_count()));
  CHECK(parse_setting("sf") == Setting::kSparsification);
  CHECK_THROWS_AS(parse_setting("xx"), ConfigError);
}

TEST_CASE("gene decoding covers the ranges") {
  const FLProblem bc(desk(Setting::kBatchCrypt));
  auto lo = bc.decode(std::vector<double>{0.0, 0.0, 0.0, 0.0});
  auto hi = bc.decode(std::vector<double>{1.0, 1.0, 1.0, 1.0});
  CHECK(lo.at("lr") == 0.01);
  CHECK(hi.at("lr") == doctest::Approx(0.3));
  CHECK(lo.at("hidden1") == 1);
  CHECK(hi.at("hidden2") == 8);
  CHECK(lo.at("bs") == 100);
  CHECK(hi.at("bs") == 800);
  CHECK(bc.decode(std::vector<double>{0.5, 0.5, 0.5, 0.3}).at("bs") == 200);
  CHECK(bc.decode(std::vector<double>{0.5, 0.5, 0.5, 0.6}).at("bs") == 400);
  std::set<double> widths;
  for (int i = 0; i <= 1000; ++i) {
    widths.insert(bc.decode(std::vector<double>{0.5, i / 1000.0, 0.5, 0.5}).at("hidden1"));
  }
  CHECK(widths.size() == 8);
  CHECK_NOTHROW(bc.validate(hi));
}

TEST_CASE("explicit values are validated against their ranges") {
  const FLProblem rd(desk(Setting::kRandomization));
  try {
    rd.validate({{"lr", 0.1}, {"sigma_rd", 1.5}, {"c_clip", 2.0}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sigma_rd") != std::string::npos);
    CHECK(msg.find("[0, 1]") != std::string::npos);
  }
  CHECK_THROWS_AS(rd.validate({{"lr", 0.1}, {"sigma_rd", 0.5}}), ConfigError);
  CHECK_THROWS_AS(rd.validate({{"lr", 0.1}, {"sigma_rd", 0.5}, {"c_clip", 2}, {"rho", 1}}),
                  ConfigError);
  const FLProblem bc(desk(Setting::kBatchCrypt));
  CHECK_THROWS_WITH_AS(bc.validate({{"lr", 0.1}, {"hidden1", 4}, {"hidden2", 4}, {"bs", 300}}),
                       doctest::Contains("{100, 200, 400, 800}"), ConfigError);
  CHECK_THROWS_AS(bc.validate({{"lr", 0.1}, {"hidden1", 4.5}, {"hidden2", 4}, {"bs", 100}}),
                  ConfigError);
}

TEST_CASE("setting evaluations are finite and repeatable") {
  const FLProblem rd(desk(Setting::kRandomization));
  const Assignment v{{"lr", 0.1}, {"sigma_rd", 0.5}, {"c_clip", 2.0}};
  const auto a = rd.run(v, 3);
  const auto b = rd.run(v, 3);
  CHECK(std::isfinite(a.utility_loss));
  CHECK(std::isfinite(a.privacy_leakage));
  CHECK(std::isfinite(a.training_cost));
  CHECK(a.utility_loss == b.utility_loss);
  CHECK(a.training_cost == b.training_cost);

  const FLProblem sf(desk(Setting::kSparsification));
  const auto y = sf.evaluate(std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.5}, 1);
  CHECK(y.size() == 3);
  CHECK(y[1] >= 0.0);
  CHECK(y[1] <= 1.0);
  CHECK(y[2] <= sf.default_reference()[2]);
}
