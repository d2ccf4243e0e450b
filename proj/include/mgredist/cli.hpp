#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "mgredist/mg.hpp"
#include "mgredist/perf_model.hpp"
#include "mgredist/redist.hpp"

/// @file cli.hpp
/// Command-line front end: plan, paths, solve and search-bench subcommands.
/// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
/// 3 reconciliation failure.

namespace mgredist {

struct RunConfig {
  std::optional<Dims> grid;   ///< global point counts
  std::optional<Dims> local;  ///< per-rank point counts (weak scaling)
  Dims proc = Dims::of(1, 1);
  std::string machine_file;  ///< empty: built-in Blue Waters parameters
  int nu1 = 2;
  int nu2 = 1;
  int cycles = 10;
  RedistMode mode = RedistMode::NonRedundant;
  TriggerThresholds trigger;
  InterpMode interp = InterpMode::OperatorInduced;
  double anisotropy = 16.0;
  double cell_aspect = 0.0;  ///< 0: derive from the unit-square mesh
  std::string rhs = "one";   ///< "one" or "random"
  std::uint64_t seed = 0;
  bool simulate = false;
  std::string format = "table";  ///< table | json | csv
  std::string out_path;          ///< empty: stdout
  int bench_max_log2 = 12;

  GlobalGrid resolve_grid() const;
  MachineParams machine() const;
  PlanProblem plan_problem() const;
  void validate() const;  ///< throws std::invalid_argument on bad combinations
};

/// Applies key=value lines (same keys as the long CLI flags); file settings
/// take precedence over flags already parsed.
void apply_config_file(RunConfig& cfg, const std::string& path);

Dims parse_dims_arg(const std::string& s);

int cmd_plan(const RunConfig& cfg, std::ostream& os);
int cmd_paths(const RunConfig& cfg, std::istream& paths, std::ostream& os);
int cmd_solve(const RunConfig& cfg, std::ostream& os);
int cmd_search_bench(const RunConfig& cfg, std::ostream& os);

int run_cli(int argc, char** argv);

}  // namespace mgredist
