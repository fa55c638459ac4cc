#include "cmofl/runner/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "cmofl/bench/problems.hpp"
#include "cmofl/core/errors.hpp"
#include "cmofl/core/hypervolume.hpp"
#include "cmofl/core/parallel.hpp"
#include "cmofl/evolve/nsga2.hpp"
#include "cmofl/psl/psl.hpp"

namespace cmofl::runner {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no infinity; crowding distances use null for it.
json inf_list(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(std::isinf(x) ? json(nullptr) : json(x));
  return out;
}

std::vector<double> inf_list_from(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(x.is_null() ? std::numeric_limits<double>::infinity() : x.get<double>());
  return out;
}

json record_to_json(const GenerationRecord& r) {
  return {{"generation", r.generation}, {"hv_feasible", r.hv_feasible}, {"hv_all", r.hv_all},
          {"feasible_count", r.feasible_count}, {"best", r.best}};
}

GenerationRecord record_from_json(const json& j) {
  GenerationRecord r;
  r.generation = j.at("generation").get<std::size_t>();
  r.hv_feasible = j.at("hv_feasible").get<double>();
  r.hv_all = j.at("hv_all").get<double>();
  r.feasible_count = j.at("feasible_count").get<std::size_t>();
  r.best = j.at("best").get<std::vector<double>>();
  return r;
}

json entries_json(const std::vector<ArchiveEntry>& es) {
  json out = json::array();
  for (const auto& e : es) out.push_back(entry_to_json(e));
  return out;
}

std::vector<ArchiveEntry> entries_from(const json& j) {
  std::vector<ArchiveEntry> out;
  for (const auto& e : j) out.push_back(entry_from_json(e));
  return out;
}

json trace_json(const std::vector<GenerationRecord>& trace) {
  json out = json::array();
  for (const auto& r : trace) out.push_back(record_to_json(r));
  return out;
}

std::vector<GenerationRecord> trace_from(const json& j) {
  std::vector<GenerationRecord> out;
  for (const auto& r : j) out.push_back(record_from_json(r));
  return out;
}

json state_json(const evolve::Nsga2State& s) {
  return {{"generation", s.generation}, {"population", entries_json(s.population)},
          {"rank", s.rank}, {"crowding", inf_list(s.crowding)}, {"rng_state", s.rng_state},
          {"next_id", s.next_id}, {"trace", trace_json(s.trace)},
          {"elite", entries_json(s.elite)}, {"feasible_evaluations", s.feasible_evaluations}};
}

evolve::Nsga2State nsga2_state_from(const json& j) {
  evolve::Nsga2State s;
  s.generation = j.at("generation").get<std::size_t>();
  s.population = entries_from(j.at("population"));
  s.rank = j.at("rank").get<std::vector<std::size_t>>();
  s.crowding = inf_list_from(j.at("crowding"));
  s.rng_state = j.at("rng_state").get<std::string>();
  s.next_id = j.at("next_id").get<std::uint64_t>();
  s.trace = trace_from(j.at("trace"));
  s.elite = entries_from(j.at("elite"));
  s.feasible_evaluations = j.at("feasible_evaluations").get<std::size_t>();
  return s;
}

json state_json(const psl::PslState& s) {
  json diags = json::array();
  for (const auto& d : s.diagnostics) {
    json kernels = json::array();
    for (const auto& k : d.kernels) {
      kernels.push_back({k.length_scale, k.signal_variance, k.noise_variance});
    }
    diags.push_back({{"generation", d.generation}, {"kernels", kernels}, {"final_loss", d.final_loss}});
  }
  return {{"generation", s.generation}, {"entries", entries_json(s.archive.entries)},
          {"next_id", s.next_id}, {"trace", trace_json(s.trace)}, {"diagnostics", diags}};
}

psl::PslState psl_state_from(const json& j) {
  psl::PslState s;
  s.generation = j.at("generation").get<std::size_t>();
  s.archive.entries = entries_from(j.at("entries"));
  s.archive.generation = s.generation;
  s.next_id = j.at("next_id").get<std::uint64_t>();
  s.trace = trace_from(j.at("trace"));
  for (const auto& d : j.at("diagnostics")) {
    psl::PslDiagnostics diag;
    diag.generation = d.at("generation").get<std::size_t>();
    diag.final_loss = d.at("final_loss").get<double>();
    for (const auto& k : d.at("kernels")) {
      diag.kernels.push_back({k.at(0).get<double>(), k.at(1).get<double>(), k.at(2).get<double>()});
    }
    s.diagnostics.push_back(std::move(diag));
  }
  return s;
}

json state_json(const bench::RandomSearchState& s) {
  return {{"generation", s.generation}, {"entries", entries_json(s.archive.entries)},
          {"rng_state", s.rng_state}, {"next_id", s.next_id}, {"trace", trace_json(s.trace)}};
}

bench::RandomSearchState random_state_from(const json& j) {
  bench::RandomSearchState s;
  s.generation = j.at("generation").get<std::size_t>();
  s.archive.entries = entries_from(j.at("entries"));
  s.archive.generation = s.generation;
  s.rng_state = j.at("rng_state").get<std::string>();
  s.next_id = j.at("next_id").get<std::uint64_t>();
  s.trace = trace_from(j.at("trace"));
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ResourceError("cannot write " + tmp.string());
    out << text;
    if (!out) throw ResourceError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::optional<json> read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// A saved checkpoint or archive is only reused when it was produced by the
// same manifest and seed.
bool matches(const json& saved, const json& manifest, std::uint64_t seed) {
  return saved.value("schema", "") == kSchemaVersion && saved.contains("manifest") &&
         saved.at("manifest") == manifest && saved.value("seed", std::uint64_t{0}) == seed;
}

json without_generations(json manifest) {
  manifest["budget"].erase("generations");
  return manifest;
}

// Checkpoints may come from a shorter run of the same manifest, which lets a
// finished run be extended.
template <class State>
std::optional<State> load_checkpoint(const fs::path& path, const json& manifest, std::uint64_t seed,
                                     std::size_t generations, State (*parse)(const json&)) {
  if (path.empty()) return std::nullopt;
  const auto saved = read_json(path);
  if (!saved) return std::nullopt;
  if (!matches(*saved, without_generations(manifest), seed)) {
    throw ConfigError("checkpoint " + path.string() + " was written by a different manifest");
  }
  State s = parse(saved->at("state"));
  if (s.generation > generations) {
    throw ConfigError("checkpoint " + path.string() + " is at generation " +
                      std::to_string(s.generation) + ", beyond the budget of " +
                      std::to_string(generations));
  }
  return s;
}

template <class State>
std::function<void(const State&)> checkpoint_writer(const fs::path& path, const json& manifest,
                                                    std::uint64_t seed) {
  if (path.empty()) return nullptr;
  return [path, manifest, seed](const State& s) {
    json j = {{"schema", kSchemaVersion}, {"seed", seed}, {"manifest", without_generations(manifest)},
              {"state", state_json(s)}};
    write_text(path, j.dump() + "\n");
  };
}

json constraints_json(const ConstraintSpec& c) {
  json bounds = json::array();
  for (const auto& b : c.bounds) bounds.push_back(b ? json(*b) : json(nullptr));
  return {{"bounds", bounds}, {"penalties", c.penalties}};
}

std::string trace_csv(const std::vector<SeedRun>& runs) {
  std::string out = "seed,generation,hv_feasible,hv_all,feasible_count\n";
  for (const auto& r : runs) {
    for (const auto& g : r.trace) {
      out += std::to_string(r.seed) + "," + std::to_string(g.generation) + "," +
             num(g.hv_feasible) + "," + num(g.hv_all) + "," + std::to_string(g.feasible_count) + "\n";
    }
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows, std::size_t seeds) {
  std::string out = "generation,seeds,hv_mean,hv_std,hv_median\n";
  for (const auto& r : rows) {
    out += std::to_string(r.generation) + "," + std::to_string(seeds) + "," + num(r.mean) + "," +
           num(r.std) + "," + num(r.median) + "\n";
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> parse_row(const std::string& line, std::size_t lineno, const fs::path& path) {
  std::string s = line;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<double> row;
  std::string tok;
  while (is >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": '" + tok + "' is not a number");
    }
    row.push_back(v);
  }
  return row;
}

}  // namespace

json entry_to_json(const ArchiveEntry& e) {
  return {{"id", e.id}, {"generation", e.generation}, {"genes", e.genes},
          {"solution", e.solution}, {"raw", e.raw}, {"penalized", e.penalized},
          {"feasible", e.feasible}};
}

ArchiveEntry entry_from_json(const json& j) {
  ArchiveEntry e;
  e.id = j.at("id").get<std::uint64_t>();
  e.generation = j.at("generation").get<std::size_t>();
  e.genes = j.at("genes").get<std::vector<double>>();
  e.solution = j.at("solution").get<std::vector<double>>();
  e.raw = j.at("raw").get<std::vector<double>>();
  e.penalized = j.at("penalized").get<std::vector<double>>();
  e.feasible = j.at("feasible").get<bool>();
  return e;
}

std::unique_ptr<Problem> make_problem(const RunManifest& m) {
  if (m.problem == "zdt1") return std::make_unique<bench::BenchmarkProblem>(bench::make_zdt1(m.dimension));
  if (m.problem == "constrained_toy") {
    return std::make_unique<bench::BenchmarkProblem>(bench::make_constrained_toy(m.dimension));
  }
  if (m.is_fl()) {
    fl::SettingConfig cfg = m.fl;
    cfg.setting = fl::parse_setting(m.problem);
    cfg.constraints = m.constraints;
    cfg.reference = m.reference;
    return std::make_unique<fl::FLProblem>(cfg);
  }
  throw ConfigError("problem.name: unknown problem \"" + m.problem + "\"");
}

ConstraintSpec run_constraints(const RunManifest& m, const Problem& p) {
  ConstraintSpec c = m.constraints ? *m.constraints : p.default_constraints();
  c.validate(p.objective_count());
  return c;
}

ReferencePoint run_reference(const RunManifest& m, const Problem& p) {
  ReferencePoint z = m.reference ? *m.reference : p.default_reference();
  if (z.size() != p.objective_count()) {
    throw ConfigError("reference: needs " + std::to_string(p.objective_count()) + " values, got " +
                      std::to_string(z.size()));
  }
  return z;
}

SeedRun run_seed(const RunManifest& m, const Problem& problem, std::uint64_t seed,
                 std::size_t workers, const fs::path& checkpoint) {
  const auto constraints = run_constraints(m, problem);
  const auto reference = run_reference(m, problem);
  const auto evaluator = problem.evaluator();
  const json manifest = manifest_to_json(m);
  SeedRun run;
  run.seed = seed;

  switch (m.algorithm) {
    case Algorithm::kNsga2: {
      evolve::Nsga2Options opt;
      opt.dimension = problem.dimension();
      opt.objectives = problem.objective_count();
      opt.reference = reference;
      opt.seed = seed;
      opt.workers = workers;
      opt.on_generation = checkpoint_writer<evolve::Nsga2State>(checkpoint, manifest, seed);
      opt.resume = load_checkpoint<evolve::Nsga2State>(checkpoint, manifest, seed, m.nsga2.generations,
                                                       nsga2_state_from);
      auto r = evolve::run_nsga2(m.nsga2, constraints, evaluator, opt);
      run.trace = std::move(r.trace);
      run.entries = std::move(r.archive.entries);
      run.elite = std::move(r.elite);
      break;
    }
    case Algorithm::kPsl: {
      psl::PslOptions opt;
      opt.dimension = problem.dimension();
      opt.objectives = problem.objective_count();
      opt.reference = reference;
      opt.seed = seed;
      opt.workers = workers;
      opt.on_generation = checkpoint_writer<psl::PslState>(checkpoint, manifest, seed);
      opt.resume = load_checkpoint<psl::PslState>(checkpoint, manifest, seed, m.psl.generations,
                                                   psl_state_from);
      auto r = psl::run_psl(m.psl, constraints, evaluator, opt);
      run.trace = std::move(r.trace);
      run.entries = std::move(r.archive.entries);
      break;
    }
    case Algorithm::kRandom: {
      bench::RandomSearchOptions opt;
      opt.dimension = problem.dimension();
      opt.objectives = problem.objective_count();
      opt.reference = reference;
      opt.seed = seed;
      opt.workers = workers;
      opt.on_generation = checkpoint_writer<bench::RandomSearchState>(checkpoint, manifest, seed);
      opt.resume = load_checkpoint<bench::RandomSearchState>(checkpoint, manifest, seed,
                                                              m.random.generations, random_state_from);
      const auto c = m.baseline ? constraints.without_penalties() : constraints;
      auto r = bench::run_random_search(m.random, c, evaluator, opt);
      run.trace = std::move(r.trace);
      run.entries = std::move(r.archive.entries);
      break;
    }
  }
  return run;
}

std::vector<SummaryRow> summarize(const std::vector<SeedRun>& runs) {
  std::vector<SummaryRow> rows;
  if (runs.empty()) return rows;
  const std::size_t t = runs.front().trace.size();
  for (const auto& r : runs) {
    if (r.trace.size() != t) throw InvalidInput("summarize: seeds have traces of different length");
  }
  for (std::size_t g = 0; g < t; ++g) {
    std::vector<double> hv;
    for (const auto& r : runs) hv.push_back(r.trace[g].hv_feasible);
    SummaryRow row;
    row.generation = runs.front().trace[g].generation;
    for (double v : hv) row.mean += v;
    row.mean /= static_cast<double>(hv.size());
    if (hv.size() > 1) {
      double ss = 0.0;
      for (double v : hv) ss += (v - row.mean) * (v - row.mean);
      row.std = std::sqrt(ss / static_cast<double>(hv.size() - 1));
    }
    row.median = median(hv);
    rows.push_back(row);
  }
  return rows;
}

std::vector<SeedRun> cmd_optimize(const RunManifest& m) {
  m.validate();
  const auto problem = make_problem(m);
  const auto constraints = run_constraints(m, *problem);
  const auto reference = run_reference(m, *problem);
  const fs::path out = m.output_dir;
  fs::create_directories(out);
  const json manifest = manifest_to_json(m);
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  const auto* flp = dynamic_cast<const fl::FLProblem*>(problem.get());
  const std::size_t n = m.seeds.size();
  const std::size_t seed_workers = std::min(m.workers, n);
  const std::size_t inner_workers = std::max<std::size_t>(1, m.workers / seed_workers);
  std::vector<SeedRun> runs(n);

  parallel_for(n, seed_workers, [&](std::size_t i) {
    const std::uint64_t seed = m.seeds[i];
    const fs::path archive = out / ("archive_seed" + std::to_string(seed) + ".json");
    const fs::path checkpoint = out / ("checkpoint_seed" + std::to_string(seed) + ".json");
    if (const auto saved = read_json(archive); saved && matches(*saved, manifest, seed)) {
      runs[i].seed = seed;
      runs[i].trace = trace_from(saved->at("trace"));
      runs[i].entries = entries_from(saved->at("entries"));
      if (saved->contains("elite")) runs[i].elite = entries_from(saved->at("elite"));
      return;
    }
    runs[i] = run_seed(m, *problem, seed, inner_workers, checkpoint);

    json j = {{"schema", kSchemaVersion},
              {"seed", seed},
              {"manifest", manifest},
              {"objectives", problem->objective_names()},
              {"reference", reference},
              {"constraints", constraints_json(constraints)},
              {"trace", trace_json(runs[i].trace)},
              {"entries", entries_json(runs[i].entries)}};
    if (m.algorithm == Algorithm::kNsga2) j["elite"] = entries_json(runs[i].elite);
    if (flp) {
      json values = json::array();
      for (const auto& e : runs[i].entries) values.push_back(flp->decode(e.solution));
      j["hyperparameters"] = values;
    }
    write_text(archive, j.dump(2) + "\n");
    fs::remove(checkpoint);
  });

  write_text(out / "trace.csv", trace_csv(runs));
  write_text(out / "summary.csv", summary_csv(summarize(runs), n));
  return runs;
}

void cmd_benchmark(const RunManifest& m) {
  const fs::path out = m.output_dir;
  RunManifest c = m;
  c.baseline = false;
  c.nsga2.unconstrained_baseline = false;
  c.psl.unconstrained_baseline = false;
  c.output_dir = (out / "cmofl").string();
  RunManifest b = m;
  b.baseline = true;
  b.nsga2.unconstrained_baseline = true;
  b.psl.unconstrained_baseline = true;
  b.output_dir = (out / "mofl-baseline").string();

  const auto sc = summarize(cmd_optimize(c));
  const auto sb = summarize(cmd_optimize(b));
  std::string csv =
      "generation,cmofl_mean,cmofl_std,cmofl_median,baseline_mean,baseline_std,baseline_median\n";
  for (std::size_t g = 0; g < sc.size(); ++g) {
    csv += std::to_string(sc[g].generation) + "," + num(sc[g].mean) + "," + num(sc[g].std) + "," +
           num(sc[g].median) + "," + num(sb[g].mean) + "," + num(sb[g].std) + "," +
           num(sb[g].median) + "\n";
  }
  write_text(out / "comparison.csv", csv);
}

HvReport hv_from_file(const fs::path& path, const ReferencePoint& reference) {
  std::ifstream in(path);
  if (!in) throw ResourceError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  HvReport report;
  std::vector<ObjectiveVector> points;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    try {
      if (j.is_object()) {
        auto take = [&](const json& list, bool count_infeasible) {
          for (const auto& e : list) {
            if (!e.at("feasible").get<bool>()) {
              report.infeasible += count_infeasible;
              continue;
            }
            points.push_back(e.at("raw").get<ObjectiveVector>());
          }
        };
        take(j.at("entries"), true);
        // nsga2 archives also carry the best of every earlier generation.
        if (j.contains("elite")) take(j.at("elite"), false);
      } else {
        for (const auto& p : j) points.push_back(p.get<ObjectiveVector>());
      }
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ": not an archive or a list of objective vectors (" +
                        e.what() + ")");
    }
  } else {
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto p = line.find_first_not_of(" \t\r");
      if (p == std::string::npos || line[p] == '#') continue;
      // A leading header row is allowed.
      if (points.empty() && lineno == 1 && (std::isalpha(static_cast<unsigned char>(line[p])) != 0)) {
        continue;
      }
      points.push_back(parse_row(line, lineno, path));
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != reference.size()) {
      throw FormatError(path.string() + ": point " + std::to_string(i) + " has " +
                        std::to_string(points[i].size()) + " objectives, reference has " +
                        std::to_string(reference.size()));
    }
  }
  report.points = points.size();
  report.excluded = count_outside_reference(points, reference);
  report.hv = points.empty() ? 0.0 : hypervolume(points, reference);
  return report;
}

json cmd_evaluate(const fl::SettingConfig& cfg, const fl::Assignment& values, std::uint64_t seed) {
  const fl::FLProblem problem(cfg);
  problem.validate(values);
  const auto r = problem.run(values, seed);
  json j;
  j["setting"] = fl::setting_name(cfg.setting);
  j["seed"] = seed;
  for (const auto& [k, v] : values) j[k] = v;
  j["utility_loss"] = r.utility_loss;
  j["privacy_leakage"] = r.privacy_leakage;
  j["training_cost"] = r.training_cost;
  j["diverged"] = r.diverged;
  const auto objs = problem.objectives(r);
  json o = json::array();
  for (std::size_t i = 0; i < objs.size(); ++i) o.push_back(objs[i]);
  j["objectives"] = o;
  return j;
}

}  // namespace cmofl::runner
