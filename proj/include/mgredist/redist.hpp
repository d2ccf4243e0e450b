#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mgredist/grid.hpp"
#include "mgredist/perf_model.hpp"

/// @file redist.hpp
/// Coarse processor-grid enumeration, the redistribution search space, and
/// the A* / exhaustive searches over it.

namespace mgredist {

struct TriggerThresholds {
  std::int64_t min_extent = 3;
  std::int64_t min_points = 16;
};

/// True once the smallest local problem drops below the configured minimum
/// extent or point count.
bool redistribution_trigger(const LocalExtent& local,
                            const TriggerThresholds& t);

/// Greedy enumeration of coarser processor grids: starting from all-ones,
/// repeatedly double the rank count of the dimension with the largest
/// agglomerated local extent, among dimensions still below the current grid's
/// rank count; ties break toward the lowest dimension index.  Emits every
/// intermediate grid (strictly coarser than `proc` only).
std::vector<ProcessorGrid> enumerate_coarse_grids(const ProcessorGrid& proc,
                                                  const GlobalGrid& grid);

/// A state of the redistribution search: the processor grid and the coarse
/// grid (level) at which it takes over.
struct RedistState {
  ProcessorGrid proc;
  GlobalGrid grid;
  int depth = 0;  ///< level index; 0 is the coarsest level
};

struct RedistPath {
  std::vector<RedistState> states;       ///< initial state through 1x1
  std::vector<double> transition_cost;   ///< per transition, seconds
  double total = 0.0;                    ///< full modeled V-cycle, seconds

  /// Takeover list consumable by plan_layouts (drops the final gather-to-one
  /// pseudo-state, which plan_layouts adds back for the direct solve).
  std::vector<Takeover> takeovers() const;
  /// "64x32 -> 64x16 -> ... -> 1x1" notation.
  std::string arrows() const;
};

struct SearchStats {
  std::int64_t expanded_nodes = 0;  ///< A*: popped states; brute: complete paths
  int path_length = 0;
  double wall_time = 0.0;
};

/// Instance description shared by the planner entry points.
struct PlanProblem {
  GlobalGrid fine;
  ProcessorGrid procs;
  TriggerThresholds trigger;
  int nu1 = 2;
  int nu2 = 1;
  RedistMode mode = RedistMode::NonRedundant;
  int coarse_threshold = 3;
};

enum class HeuristicKind {
  AdmissibleCompute,  ///< communication-free, perfectly balanced lower bound
  WeightedGridProc,   ///< weighted grid-size / proc-size estimate (not admissible)
};

struct SearchOptions {
  HeuristicKind heuristic = HeuristicKind::AdmissibleCompute;
  double weight_grid = 1.0;
  double weight_proc = 1.0;
};

/// The redistribution search space for one instance.  Nodes are deduplicated
/// (processor grid, takeover level) pairs; every node also carries the
/// implicit option of running to the bottom with no further redistribution.
class SearchGraph {
 public:
  struct Node {
    ProcessorGrid proc;
    int level = 0;          ///< takeover level
    int trigger_level = -1; ///< next decision level; -1 when coarsening ends first
    std::vector<int> succ;  ///< successor node indices
  };

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<GlobalGrid>& grids() const { return grids_; }
  const PlanProblem& problem() const { return prob_; }
  int root() const { return 0; }

  /// Model cost of the levels run on `from`'s grid down to `to`'s takeover,
  /// plus the gather/scatter of the transition.
  double edge_cost(int from, int to, const MachineParams& m) const;
  /// Cost of finishing on this node's grid: remaining levels plus cgsolve
  /// (including its gather-to-one).
  double stop_cost(int node, const MachineParams& m) const;
  /// Cost-to-go estimate.
  double heuristic(int node, const MachineParams& m,
                   const SearchOptions& opt = {}) const;

  friend SearchGraph build_search_space(const PlanProblem&);

 private:
  double level_cost(int level, const ProcessorGrid& p,
                    const MachineParams& m) const;

  PlanProblem prob_;
  std::vector<GlobalGrid> grids_;
  std::vector<Node> nodes_;
  std::vector<double> flops_below_;  // prefix sums for the admissible bound
  double cg_flops_ = 0.0;
};

SearchGraph build_search_space(const PlanProblem& prob);

/// Accumulated model cost of a node-path prefix starting at the root.
double path_cost_g(const SearchGraph& g, const std::vector<int>& prefix,
                   const MachineParams& m);

std::pair<RedistPath, SearchStats> search_astar(const SearchGraph& g,
                                                const MachineParams& m,
                                                const SearchOptions& opt = {});
std::pair<RedistPath, SearchStats> search_brute(const SearchGraph& g,
                                                const MachineParams& m);

/// Explicit-path evaluation (hop list may contain any componentwise-smaller
/// grids, not only enumeration successors).
struct PathEval {
  bool valid = false;
  std::string error;
  RedistPath path;
  CostBreakdown breakdown;
};

PathEval evaluate_path(const PlanProblem& prob,
                       const std::vector<ProcessorGrid>& hops,
                       const MachineParams& m);

/// Parses "64x32 -> 64x16 -> 1x1" (the leading grid is the initial one and is
/// optional); returns the hop list.
std::vector<ProcessorGrid> parse_path_arrows(const std::string& line,
                                             const ProcessorGrid& initial);

}  // namespace mgredist
