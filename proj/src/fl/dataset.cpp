#include "cmofl/fl/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <span>
#include <sstream>

#include "cmofl/core/errors.hpp"
#include "cmofl/core/rng.hpp"

namespace cmofl::fl {
namespace {

std::string at_offset(const std::string& source, std::size_t offset, const std::string& what) {
  std::ostringstream os;
  os << source << ": " << what << " at byte offset " << offset;
  return os.str();
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) |
         (std::uint32_t{b[off + 2]} << 8) | std::uint32_t{b[off + 3]};
}

Dataset take(const Dataset& src, std::span<const std::size_t> rows) {
  Dataset out;
  out.classes = src.classes;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), src.x.cols());
  out.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = src.x.row(static_cast<Eigen::Index>(rows[r]));
    out.labels.push_back(src.labels[rows[r]]);
  }
  return out;
}

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec, std::size_t samples, std::uint64_t seed) {
  if (spec.classes < 2 || spec.features == 0) {
    throw ConfigError("synthetic dataset needs >= 2 classes and >= 1 feature");
  }
  Rng means_rng = make_rng(spec.seed, {0x4d45414e});
  std::vector<std::vector<double>> means(spec.classes, std::vector<double>(spec.features));
  std::bernoulli_distribution coin(0.5);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (auto& v : means[c]) {
      const double sign = spec.classes == 2 ? (c == 0 ? 1.0 : -1.0) : (coin(means_rng) ? 1.0 : -1.0);
      v = sign * spec.separation;
    }
  }
  Rng rng(seed);
  std::uniform_int_distribution<int> label(0, static_cast<int>(spec.classes) - 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.classes = spec.classes;
  d.x.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(spec.features));
  d.labels.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const int y = label(rng);
    d.labels[i] = y;
    for (std::size_t j = 0; j < spec.features; ++j) {
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          means[static_cast<std::size_t>(y)][j] + noise(rng);
    }
  }
  return d;
}

std::vector<Dataset> iid_partition(const Dataset& data, std::size_t clients,
                                   std::size_t per_client, std::uint64_t seed) {
  if (clients == 0) throw ConfigError("need at least one client");
  if (clients * per_client > data.size()) {
    throw ConfigError("not enough samples: " + std::to_string(data.size()) + " for " +
                      std::to_string(clients) + " clients x " + std::to_string(per_client));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Dataset> out;
  out.reserve(clients);
  for (std::size_t k = 0; k < clients; ++k) {
    out.push_back(take(data, std::span<const std::size_t>(order).subspan(k * per_client, per_client)));
  }
  return out;
}

FederatedData load_dataset(const DatasetSpec& spec, std::size_t clients) {
  if (clients == 0) throw ConfigError("need at least one client");
  FederatedData fd;
  if (const auto* s = std::get_if<SyntheticSpec>(&spec)) {
    const Dataset train = make_synthetic(*s, clients * s->per_client, derive_seed(s->seed, {1}));
    fd.clients = iid_partition(train, clients, s->per_client, derive_seed(s->seed, {2}));
    fd.test = make_synthetic(*s, s->test, derive_seed(s->seed, {3}));
    fd.classes = s->classes;
    fd.features = s->features;
    return fd;
  }
  const auto& idx = std::get<IdxSpec>(spec);
  const Dataset train = read_idx_dataset(idx.train_images, idx.train_labels, idx.classes);
  const std::size_t per_client = idx.per_client ? idx.per_client : train.size() / clients;
  fd.clients = iid_partition(train, clients, per_client, derive_seed(idx.seed, {2}));
  fd.test = read_idx_dataset(idx.test_images, idx.test_labels, idx.classes, idx.test_limit);
  fd.classes = idx.classes;
  fd.features = train.features();
  return fd;
}

IdxArray parse_idx(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  if (bytes.size() < 4) throw FormatError(at_offset(source, bytes.size(), "truncated magic number"));
  if (bytes[0] != 0 || bytes[1] != 0) {
    throw FormatError(at_offset(source, 0, "magic number must start with two zero bytes"));
  }
  IdxArray arr;
  arr.type_code = bytes[2];
  if (arr.type_code != 0x08) {
    throw FormatError(at_offset(source, 2, "unsupported element type (only unsigned byte 0x08)"));
  }
  const std::size_t ndims = bytes[3];
  if (ndims == 0) throw FormatError(at_offset(source, 3, "zero dimensions"));
  if (bytes.size() < 4 + 4 * ndims) {
    throw FormatError(at_offset(source, bytes.size(), "truncated dimension header"));
  }
  std::size_t count = 1;
  for (std::size_t i = 0; i < ndims; ++i) {
    arr.dims.push_back(read_be32(bytes, 4 + 4 * i));
    count *= arr.dims.back();
  }
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() - header != count) {
    throw FormatError(at_offset(source, std::min(bytes.size(), header + count),
                                "payload holds " + std::to_string(bytes.size() - header) +
                                    " bytes but header declares " + std::to_string(count)));
  }
  arr.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return arr;
}

IdxArray read_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_idx(bytes, path);
}

Dataset read_idx_dataset(const std::string& images, const std::string& labels,
                         std::size_t classes, std::size_t limit) {
  const IdxArray img = read_idx(images);
  const IdxArray lab = read_idx(labels);
  if (img.dims.size() < 2) throw FormatError(images + ": magic 0x00000803 expected at byte offset 0");
  if (lab.dims.size() != 1) throw FormatError(labels + ": magic 0x00000801 expected at byte offset 0");
  if (img.dims[0] != lab.dims[0]) {
    throw FormatError(labels + ": label count " + std::to_string(lab.dims[0]) +
                      " does not match image count at byte offset 4");
  }
  std::size_t n = img.dims[0];
  if (limit) n = std::min(n, limit);
  std::size_t features = 1;
  for (std::size_t i = 1; i < img.dims.size(); ++i) features *= img.dims[i];

  Dataset d;
  d.classes = classes;
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(features));
  d.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t y = lab.data[i];
    if (y >= classes) {
      throw FormatError(at_offset(labels, 8 + i, "label " + std::to_string(y) +
                                                     " outside [0, " + std::to_string(classes) + ")"));
    }
    d.labels[i] = y;
    for (std::size_t j = 0; j < features; ++j) {
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          img.data[i * features + j] / 255.0;
    }
  }
  return d;
}

}  // namespace cmofl::fl
