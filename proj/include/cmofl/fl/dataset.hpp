#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace cmofl::fl {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Samples as rows, integer labels in [0, classes).
struct Dataset {
  RowMatrix x;
  std::vector<int> labels;
  std::size_t classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t features() const { return static_cast<std::size_t>(x.cols()); }
};

// Linearly separable Gaussian classes: class c has mean separation * s_c
// where s_c is +1 / -1 for two classes (random signs otherwise), unit
// variance per feature.
struct SyntheticSpec {
  std::size_t features = 20;
  std::size_t classes = 2;
  std::size_t per_client = 1000;
  std::size_t test = 2000;
  double separation = 0.6;
  std::uint64_t seed = 2024;
};

// Image classification data in IDX format (e.g. Fashion-MNIST).
struct IdxSpec {
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::size_t per_client = 0;  // 0: split the whole training set evenly
  std::size_t test_limit = 0;  // 0: whole test set
  std::size_t classes = 10;
  std::uint64_t seed = 2024;
};

using DatasetSpec = std::variant<SyntheticSpec, IdxSpec>;

struct FederatedData {
  std::vector<Dataset> clients;
  Dataset test;
  std::size_t classes = 0;
  std::size_t features = 0;
};

// IID random partition into `clients` equal shards plus a fixed test split.
FederatedData load_dataset(const DatasetSpec& spec, std::size_t clients);

Dataset make_synthetic(const SyntheticSpec& spec, std::size_t samples, std::uint64_t seed);

// Splits `data` into `clients` disjoint shards of `per_client` samples after
// a seeded shuffle.
std::vector<Dataset> iid_partition(const Dataset& data, std::size_t clients,
                                   std::size_t per_client, std::uint64_t seed);

struct IdxArray {
  std::uint8_t type_code = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

// Reads an unsigned-byte IDX file. Errors name the failing byte offset.
IdxArray read_idx(const std::string& path);
IdxArray parse_idx(const std::vector<std::uint8_t>& bytes, const std::string& source);

// Images (magic 0x00000803) scaled to [0,1] plus labels (0x00000801).
Dataset read_idx_dataset(const std::string& images, const std::string& labels,
                         std::size_t classes, std::size_t limit = 0);

}  // namespace cmofl::fl
