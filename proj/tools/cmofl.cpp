#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cmofl/core/errors.hpp"
#include "cmofl/runner/manifest.hpp"
#include "cmofl/runner/runner.hpp"

namespace {

using cmofl::ConfigError;
using cmofl::runner::RunManifest;

struct RunFlags {
  std::string config;
  std::vector<std::uint64_t> seeds;
  std::size_t workers = 0;
  std::string out;
  bool baseline = false;
  bool cost_model = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seeds, "Seed; repeat for several runs");
  cmd->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_flag("--baseline", f.baseline, "Force every penalty coefficient to 0");
  cmd->add_flag("--cost-model", f.cost_model, "Deterministic cost model for timing objectives");
}

std::size_t env_workers() {
  const char* v = std::getenv("CMOFL_WORKERS");
  if (!v || !*v) return 0;
  try {
    std::size_t used = 0;
    const long n = std::stol(v, &used);
    if (used == std::string(v).size() && n > 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string("CMOFL_WORKERS: expected a positive integer, got \"") + v + "\"");
}

// Flags beat environment variables, which beat the config file.
RunManifest resolve(const RunFlags& f) {
  RunManifest m = cmofl::runner::load_manifest(f.config);
  if (const char* dir = std::getenv("CMOFL_OUT_DIR"); dir && *dir) m.output_dir = dir;
  if (const auto w = env_workers()) m.workers = w;
  if (!f.seeds.empty()) m.seeds = f.seeds;
  if (f.workers) m.workers = f.workers;
  if (!f.out.empty()) m.output_dir = f.out;
  if (f.baseline) {
    m.baseline = true;
    m.nsga2.unconstrained_baseline = true;
    m.psl.unconstrained_baseline = true;
  }
  if (f.cost_model) m.fl.cost_model = true;
  m.validate();
  return m;
}

cmofl::fl::Assignment parse_assignments(const std::vector<std::string>& items) {
  cmofl::fl::Assignment values;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("--set expects name=value, got \"" + item + "\"");
    }
    const std::string name = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw ConfigError("--set " + name + ": \"" + text + "\" is not a number");
    }
    values[name] = v;
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained multi-objective federated learning optimizer"};
  app.require_subcommand(1);

  RunFlags opt_flags;
  auto* optimize = app.add_subcommand("optimize", "Run an optimizer over the manifest's seeds");
  add_run_flags(optimize, opt_flags);

  RunFlags bench_flags;
  auto* benchmark = app.add_subcommand("benchmark", "Run cmofl and mofl-baseline side by side");
  add_run_flags(benchmark, bench_flags);

  std::string setting;
  std::vector<std::string> sets;
  std::uint64_t eval_seed = 0;
  std::string eval_config;
  bool eval_cost_model = false;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate one hyperparameter setting with FLO");
  evaluate->add_option("--setting", setting, "rd, bc or sf")->required();
  evaluate->add_option("--set", sets, "name=value, repeatable")->required();
  evaluate->add_option("--seed", eval_seed, "Seed");
  evaluate->add_option("--config", eval_config, "Manifest whose fl section is used")->check(CLI::ExistingFile);
  evaluate->add_flag("--cost-model", eval_cost_model, "Deterministic cost model for timing objectives");

  std::string front_file;
  std::vector<double> reference;
  auto* hv = app.add_subcommand("hv", "Exact hypervolume of a front or archive file");
  hv->add_option("file", front_file, "Archive JSON, JSON list or text rows")->required();
  hv->add_option("--ref", reference, "Reference point, one value per objective")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*optimize) {
      const auto m = resolve(opt_flags);
      const auto runs = cmofl::runner::cmd_optimize(m);
      const auto rows = cmofl::runner::summarize(runs);
      if (!rows.empty()) {
        std::cout << "final feasible HV mean " << rows.back().mean << " std " << rows.back().std
                  << " over " << runs.size() << " seed(s); artifacts in " << m.output_dir << "\n";
      }
    } else if (*benchmark) {
      const auto m = resolve(bench_flags);
      cmofl::runner::cmd_benchmark(m);
      std::cout << "comparison written to " << m.output_dir << "/comparison.csv\n";
    } else if (*evaluate) {
      cmofl::fl::SettingConfig cfg;
      if (!eval_config.empty()) cfg = cmofl::runner::load_manifest(eval_config).fl;
      cfg.setting = cmofl::fl::parse_setting(setting);
      if (eval_cost_model) cfg.cost_model = true;
      const auto values = parse_assignments(sets);
      std::cout << cmofl::runner::cmd_evaluate(cfg, values, eval_seed).dump() << "\n";
    } else if (*hv) {
      const auto r = cmofl::runner::hv_from_file(front_file, reference);
      if (r.excluded) {
        std::cerr << "warning: " << r.excluded << " point(s) not dominated by the reference point were excluded\n";
      }
      if (r.infeasible) {
        std::cerr << "note: " << r.infeasible << " infeasible archive entr" << (r.infeasible == 1 ? "y" : "ies")
                  << " skipped\n";
      }
      std::cout.precision(17);
      std::cout << r.hv << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
