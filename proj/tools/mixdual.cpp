// Command-line driver: `mixdual run ...` and `mixdual list [--csv]`.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mixdual/catalog.hpp"
#include "mixdual/errors.hpp"
#include "mixdual/experiment.hpp"

namespace {

const std::vector<mixdual::CatalogEntry>& registry() {
#ifdef MIXDUAL_EMPTY_CATALOG
  static const std::vector<mixdual::CatalogEntry> none;
  return none;
#else
  return mixdual::catalog();
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-type duality experiments for multiobjective variational problems"};
  app.require_subcommand(1);

  CLI::App* list = app.add_subcommand("list", "List built-in problems");
  bool csv = false;
  list->add_flag("--csv", csv, "Machine-readable CSV output");

  CLI::App* run = app.add_subcommand("run", "Run an experiment");
  std::string config_file, problem, partition, mode, out;
  int grid = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
  run->add_option("--config", config_file, "Config file of key = value lines");
  auto* o_problem = run->add_option("--problem", problem, "Catalog name or problem file");
  auto* o_grid = run->add_option("--grid", grid, "Grid node count");
  auto* o_partition = run->add_option("--partition", partition, "Partition, e.g. J0={1};J1={2}");
  auto* o_mode = run->add_option("--mode", mode, "weak|strong|converse|invexity|frontier|static|all");
  auto* o_tol = run->add_option("--tol", tol, "Duality-check tolerance");
  auto* o_seed = run->add_option("--seed", seed, "Sampling seed");
  auto* o_out = run->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mixdual::kExitConfigError;
  }

  if (*list) {
    std::cout << mixdual::list_problems(registry(), csv);
    return 0;
  }

  mixdual::ExperimentConfig config;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw mixdual::ConfigError("cannot read config file '" + config_file + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      config.apply_text(ss.str());
    }
  } catch (const mixdual::Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return mixdual::kExitConfigError;
  }
  if (*o_problem) config.problem = problem;
  if (*o_grid) config.grid = grid;
  if (*o_partition) config.partition = partition;
  if (*o_mode) config.mode = mode;
  if (*o_tol) config.tol = tol;
  if (*o_seed) config.seed = seed;
  if (*o_out) config.out = out;

  const mixdual::ExperimentOutput output = mixdual::run_experiment(config, registry());
  if (output.exit_code == mixdual::kExitConfigError) {
    std::cerr << output.summary;
    return output.exit_code;
  }
  try {
    mixdual::write_output(config, output);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return mixdual::kExitConfigError;
  }
  std::cout << output.summary;
  return output.exit_code;
}
