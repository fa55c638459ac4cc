#include "cmofl/runner/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "cmofl/core/errors.hpp"

namespace cmofl::runner {
namespace {

using nlohmann::json;

// Reads one JSON object, tracking which keys were consumed.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(at(key), key_path(key));
  }

  Fields child(const std::string& key) {
    return Fields(at(key), key_path(key));
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + key_path(key) + "'");
    }
  }

  template <class T>
  static T convert(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path + ": expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError(path + ": expected a non-negative integer");
      }
      return v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(path + ": expected a number");
      return v.get<T>();
    } else {
      static_assert(sizeof(T) == 0, "unsupported field type");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class T>
std::vector<T> read_list(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(Fields::convert<T>(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void read_dataset(Fields f, fl::DatasetSpec& out) {
  std::string type = "synthetic";
  f.read("type", type);
  if (type == "synthetic") {
    fl::SyntheticSpec s;
    f.read("features", s.features);
    f.read("classes", s.classes);
    f.read("per_client", s.per_client);
    f.read("test", s.test);
    f.read("separation", s.separation);
    f.read("seed", s.seed);
    out = s;
  } else if (type == "idx") {
    fl::IdxSpec s;
    f.read("train_images", s.train_images);
    f.read("train_labels", s.train_labels);
    f.read("test_images", s.test_images);
    f.read("test_labels", s.test_labels);
    f.read("per_client", s.per_client);
    f.read("test_limit", s.test_limit);
    f.read("classes", s.classes);
    f.read("seed", s.seed);
    for (const auto* p : {&s.train_images, &s.train_labels, &s.test_images, &s.test_labels}) {
      if (p->empty()) throw ConfigError(f.key_path("type") + ": idx datasets need all four file paths");
    }
    out = s;
  } else {
    throw ConfigError(f.key_path("type") + ": expected \"synthetic\" or \"idx\", got \"" + type + "\"");
  }
  f.finish();
}

void read_fl(Fields f, fl::SettingConfig& c) {
  f.read("clients", c.clients);
  f.read("rounds", c.rounds);
  f.read("local_epochs", c.local_epochs);
  f.read("batch_size", c.batch_size);
  f.read("hidden_max", c.hidden_max);
  if (f.has("rd_hidden")) c.rd_hidden = read_list<std::size_t>(f.at("rd_hidden"), f.key_path("rd_hidden"));
  f.read("c1", c.c1);
  f.read("c2", c.c2);
  f.read("cost_model", c.cost_model);
  f.read("seconds_per_sample_parameter", c.seconds_per_sample_parameter);
  if (f.has("weighting")) {
    const auto w = Fields::convert<std::string>(f.at("weighting"), f.key_path("weighting"));
    if (w == "uniform") c.weighting = fl::ServerWeighting::kUniform;
    else if (w == "sample_count") c.weighting = fl::ServerWeighting::kSampleCount;
    else throw ConfigError(f.key_path("weighting") + ": expected \"uniform\" or \"sample_count\"");
  }
  if (f.has("sparse_aggregation")) {
    const auto a = Fields::convert<std::string>(f.at("sparse_aggregation"), f.key_path("sparse_aggregation"));
    if (a == "shared_mean") c.sparse_aggregation = fl::SparseAggregation::kSharedMean;
    else if (a == "all_clients") c.sparse_aggregation = fl::SparseAggregation::kAllClients;
    else throw ConfigError(f.key_path("sparse_aggregation") + ": expected \"shared_mean\" or \"all_clients\"");
  }
  if (f.has("batchcrypt")) {
    auto b = f.child("batchcrypt");
    b.read("payload_bits", c.batchcrypt.payload_bits);
    b.read("t_enc", c.batchcrypt.t_enc);
    b.read("t_add", c.batchcrypt.t_add);
    b.read("t_dec", c.batchcrypt.t_dec);
    b.finish();
  }
  if (f.has("dataset")) read_dataset(f.child("dataset"), c.dataset);
  f.finish();
}

json dataset_json(const fl::DatasetSpec& d) {
  if (const auto* s = std::get_if<fl::SyntheticSpec>(&d)) {
    return {{"type", "synthetic"}, {"features", s->features}, {"classes", s->classes},
            {"per_client", s->per_client}, {"test", s->test}, {"separation", s->separation},
            {"seed", s->seed}};
  }
  const auto& s = std::get<fl::IdxSpec>(d);
  return {{"type", "idx"}, {"train_images", s.train_images}, {"train_labels", s.train_labels},
          {"test_images", s.test_images}, {"test_labels", s.test_labels},
          {"per_client", s.per_client}, {"test_limit", s.test_limit}, {"classes", s.classes},
          {"seed", s.seed}};
}

}  // namespace

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kNsga2: return "nsga2";
    case Algorithm::kPsl: return "psl";
    case Algorithm::kRandom: return "random";
  }
  return "";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "nsga2") return Algorithm::kNsga2;
  if (name == "psl") return Algorithm::kPsl;
  if (name == "random") return Algorithm::kRandom;
  throw ConfigError("algorithm: expected nsga2, psl or random, got \"" + name + "\"");
}

void RunManifest::validate() const {
  if (seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds: duplicate seed");
  }
  if (workers == 0) throw ConfigError("workers: must be >= 1");
  if (!is_fl() && problem != "zdt1" && problem != "constrained_toy") {
    throw ConfigError("problem.name: expected zdt1, constrained_toy, rd, bc or sf, got \"" + problem + "\"");
  }
  if (!is_fl() && dimension < 2) throw ConfigError("problem.dimension: must be >= 2");
  switch (algorithm) {
    case Algorithm::kNsga2:
      if (nsga2.generations == 0) throw ConfigError("budget.generations: must be >= 1");
      try {
        nsga2.validate();
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("nsga2: ") + e.what());
      }
      break;
    case Algorithm::kPsl:
      if (psl.generations == 0) throw ConfigError("budget.generations: must be >= 1");
      psl.validate();
      break;
    case Algorithm::kRandom:
      if (random.generations == 0) throw ConfigError("budget.generations: must be >= 1");
      if (random.batch == 0 || random.initial == 0) throw ConfigError("budget: batch and initial must be >= 1");
      break;
  }
}

RunManifest parse_manifest(const nlohmann::json& j) {
  RunManifest m;
  Fields f(j, "");
  if (f.has("schema")) {
    const auto schema = Fields::convert<std::string>(f.at("schema"), "schema");
    if (schema != kSchemaVersion) {
      throw ConfigError("schema: expected \"" + std::string(kSchemaVersion) + "\", got \"" + schema + "\"");
    }
  }
  if (f.has("algorithm")) m.algorithm = parse_algorithm(Fields::convert<std::string>(f.at("algorithm"), "algorithm"));
  if (f.has("problem")) {
    auto p = f.child("problem");
    p.read("name", m.problem);
    p.read("dimension", m.dimension);
    p.finish();
  }
  if (f.has("mode")) {
    const auto mode = Fields::convert<std::string>(f.at("mode"), "mode");
    if (mode == "cmofl") m.baseline = false;
    else if (mode == "mofl-baseline") m.baseline = true;
    else throw ConfigError("mode: expected \"cmofl\" or \"mofl-baseline\", got \"" + mode + "\"");
  }
  if (f.has("seeds")) m.seeds = read_list<std::uint64_t>(f.at("seeds"), "seeds");

  if (f.has("budget")) {
    auto b = f.child("budget");
    std::optional<std::size_t> generations;
    if (b.has("generations")) generations = Fields::convert<std::size_t>(b.at("generations"), "budget.generations");
    if (generations) {
      m.nsga2.generations = *generations;
      m.psl.generations = *generations;
      m.random.generations = *generations;
    }
    b.read("population", m.nsga2.population);
    if (b.has("batch")) {
      m.psl.batch = Fields::convert<std::size_t>(b.at("batch"), "budget.batch");
      m.random.batch = m.psl.batch;
    }
    if (b.has("initial")) {
      m.psl.initial = Fields::convert<std::size_t>(b.at("initial"), "budget.initial");
      m.random.initial = m.psl.initial;
    }
    b.read("candidates", m.psl.candidates);
    b.finish();
  }
  if (f.has("nsga2")) {
    auto g = f.child("nsga2");
    g.read("crossover_probability", m.nsga2.sbx.probability);
    g.read("crossover_eta", m.nsga2.sbx.eta);
    g.read("crossover_gene_probability", m.nsga2.sbx.gene_probability);
    g.read("mutation_eta", m.nsga2.mutation_eta);
    g.read("mutation_rate", m.nsga2.mutation_rate);
    if (g.has("chromosome")) {
      const auto c = Fields::convert<std::string>(g.at("chromosome"), "nsga2.chromosome");
      if (c == "real") m.nsga2.chromosome = evolve::Chromosome::kReal;
      else if (c == "binary") m.nsga2.chromosome = evolve::Chromosome::kBinary;
      else throw ConfigError("nsga2.chromosome: expected \"real\" or \"binary\"");
    }
    g.read("bits_per_variable", m.nsga2.bits_per_variable);
    g.read("binary_crossover_probability", m.nsga2.binary.crossover_probability);
    g.read("bit_flip_probability", m.nsga2.binary.flip_probability);
    g.finish();
  }
  if (f.has("psl")) {
    auto p = f.child("psl");
    p.read("steps", m.psl.training.steps);
    p.read("preference_batch", m.psl.training.preference_batch);
    p.read("learning_rate", m.psl.training.adam.learning_rate);
    p.read("hidden", m.psl.hidden);
    p.read("beta", m.psl.beta);
    p.read("ideal_offset", m.psl.ideal_offset);
    p.read("sharpness", m.psl.sharpness);
    p.read("hvi_on_penalized", m.psl.hvi_on_penalized);
    if (p.has("kernel")) {
      auto k = p.child("kernel");
      psl::KernelParams kp;
      k.read("length_scale", kp.length_scale);
      k.read("signal_variance", kp.signal_variance);
      k.read("noise_variance", kp.noise_variance);
      k.finish();
      m.psl.kernel = kp;
    }
    p.finish();
  }
  if (f.has("fl")) read_fl(f.child("fl"), m.fl);
  if (f.has("constraints")) {
    auto c = f.child("constraints");
    ConstraintSpec spec;
    const auto& bounds = c.at("bounds");
    if (!bounds.is_array()) throw ConfigError("constraints.bounds: expected a list of numbers or null");
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      if (bounds[i].is_null()) spec.bounds.push_back(std::nullopt);
      else spec.bounds.push_back(Fields::convert<double>(bounds[i], "constraints.bounds[" + std::to_string(i) + "]"));
    }
    spec.penalties = read_list<double>(c.at("penalties"), "constraints.penalties");
    c.finish();
    m.constraints = spec;
  }
  if (f.has("reference")) m.reference = read_list<double>(f.at("reference"), "reference");
  f.read("workers", m.workers);
  f.read("output_dir", m.output_dir);
  f.finish();

  m.nsga2.unconstrained_baseline = m.baseline;
  m.psl.unconstrained_baseline = m.baseline;
  if (m.is_fl()) m.fl.setting = fl::parse_setting(m.problem);
  m.validate();
  return m;
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_manifest(j);
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  json j;
  j["schema"] = kSchemaVersion;
  j["algorithm"] = algorithm_name(m.algorithm);
  j["problem"] = {{"name", m.problem}};
  if (!m.is_fl()) j["problem"]["dimension"] = m.dimension;
  j["mode"] = m.baseline ? "mofl-baseline" : "cmofl";
  j["seeds"] = m.seeds;
  switch (m.algorithm) {
    case Algorithm::kNsga2:
      j["budget"] = {{"generations", m.nsga2.generations}, {"population", m.nsga2.population}};
      j["nsga2"] = {{"crossover_probability", m.nsga2.sbx.probability},
                    {"crossover_eta", m.nsga2.sbx.eta},
                    {"crossover_gene_probability", m.nsga2.sbx.gene_probability},
                    {"mutation_eta", m.nsga2.mutation_eta},
                    {"mutation_rate", m.nsga2.mutation_rate},
                    {"chromosome", m.nsga2.chromosome == evolve::Chromosome::kReal ? "real" : "binary"},
                    {"bits_per_variable", m.nsga2.bits_per_variable},
                    {"binary_crossover_probability", m.nsga2.binary.crossover_probability},
                    {"bit_flip_probability", m.nsga2.binary.flip_probability}};
      break;
    case Algorithm::kPsl:
      j["budget"] = {{"generations", m.psl.generations}, {"batch", m.psl.batch},
                     {"initial", m.psl.initial}, {"candidates", m.psl.candidates}};
      j["psl"] = {{"steps", m.psl.training.steps},
                  {"preference_batch", m.psl.training.preference_batch},
                  {"learning_rate", m.psl.training.adam.learning_rate},
                  {"hidden", m.psl.hidden},
                  {"beta", m.psl.beta},
                  {"ideal_offset", m.psl.ideal_offset},
                  {"sharpness", m.psl.sharpness},
                  {"hvi_on_penalized", m.psl.hvi_on_penalized}};
      if (m.psl.kernel) {
        j["psl"]["kernel"] = {{"length_scale", m.psl.kernel->length_scale},
                              {"signal_variance", m.psl.kernel->signal_variance},
                              {"noise_variance", m.psl.kernel->noise_variance}};
      }
      break;
    case Algorithm::kRandom:
      j["budget"] = {{"generations", m.random.generations}, {"batch", m.random.batch},
                     {"initial", m.random.initial}};
      break;
  }
  if (m.is_fl()) {
    const auto& c = m.fl;
    j["fl"] = {{"clients", c.clients},
               {"rounds", c.rounds},
               {"local_epochs", c.local_epochs},
               {"batch_size", c.batch_size},
               {"hidden_max", c.hidden_max},
               {"rd_hidden", c.rd_hidden},
               {"c1", c.c1},
               {"c2", c.c2},
               {"cost_model", c.cost_model},
               {"seconds_per_sample_parameter", c.seconds_per_sample_parameter},
               {"weighting", c.weighting == fl::ServerWeighting::kUniform ? "uniform" : "sample_count"},
               {"sparse_aggregation", c.sparse_aggregation == fl::SparseAggregation::kSharedMean
                                          ? "shared_mean"
                                          : "all_clients"},
               {"batchcrypt", {{"payload_bits", c.batchcrypt.payload_bits},
                               {"t_enc", c.batchcrypt.t_enc},
                               {"t_add", c.batchcrypt.t_add},
                               {"t_dec", c.batchcrypt.t_dec}}},
               {"dataset", dataset_json(c.dataset)}};
  }
  if (m.constraints) {
    json bounds = json::array();
    for (const auto& b : m.constraints->bounds) bounds.push_back(b ? json(*b) : json(nullptr));
    j["constraints"] = {{"bounds", bounds}, {"penalties", m.constraints->penalties}};
  }
  if (m.reference) j["reference"] = *m.reference;
  return j;
}

}  // namespace cmofl::runner
