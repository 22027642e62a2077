#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mixdual/catalog.hpp"
#include "mixdual/solver.hpp"

namespace mixdual {

struct ExperimentConfig {
  std::string problem = "P1";  ///< catalog name or problem-file path
  int grid = 201;
  std::string partition;  ///< empty: J0={1}, J1={2..m}
  std::string mode = "all";
  double tol = 1e-4;  ///< duality-check tolerance
  std::uint64_t seed = 1;
  std::string out = "out";
  std::vector<double> weights;  ///< empty: equal weights
  int pairs = 100;              ///< weak-duality samples
  int invexity_pairs = 500;
  int frontier_points = 9;
  int static_pairs = 200;
  double efficiency_tol = 1e-6;
  SolverOptions solver;

  /// Applies one `key = value` setting. Throws ConfigError.
  void set(std::string_view key, std::string_view value);
  /// Applies every `key = value` line of a config file; `#` starts a comment.
  void apply_text(std::string_view text);
  /// Throws ConfigError for invalid values.
  void validate() const;
  /// Effective configuration, one `key = value` per line, fixed order.
  std::string echo() const;
};

inline const std::vector<std::string>& experiment_modes() {
  static const std::vector<std::string> modes = {"weak", "strong", "converse", "invexity", "frontier", "static", "all"};
  return modes;
}

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitSolverFailure = 3 };

struct ExperimentOutput {
  int exit_code = kExitOk;
  std::string summary;
  /// File name (relative to the output directory) and contents.
  std::vector<std::pair<std::string, std::string>> files;
};

/// Resolves `problem` against `registry` first, then as a file path.
/// Throws ConfigError.
ProblemSpec resolve_problem(const std::string& problem, const std::vector<CatalogEntry>& registry);

/// Runs the configured mode. Never throws for configuration or numerical
/// failures; they become exit codes with a diagnostic in the summary.
ExperimentOutput run_experiment(const ExperimentConfig& config, const std::vector<CatalogEntry>& registry);

/// Writes summary.txt, config.echo and every output file into config.out.
void write_output(const ExperimentConfig& config, const ExperimentOutput& output);

/// `name n p m boundary note` per line, or CSV with a header when csv.
std::string list_problems(const std::vector<CatalogEntry>& registry, bool csv);

}  // namespace mixdual
