#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mgredist/grid.hpp"

/// @file perf_model.hpp
/// Postal-model costs for every phase of the redistributed V-cycle, plus the
/// exact message/byte accounting the simulator is reconciled against.

namespace mgredist {

enum class RedistMode { Redundant, NonRedundant };

/// Postal-model machine triple.
struct MachineParams {
  double alpha = 0.0;  ///< message latency, seconds
  double beta = 0.0;   ///< inverse bandwidth, seconds per byte
  double gamma = 0.0;  ///< inverse effective flop rate, seconds per flop

  /// Key/value text file with keys alpha_s, beta_s_per_byte, gamma_s_per_flop.
  static MachineParams from_file(const std::string& path);
  static MachineParams parse(std::istream& is);

  /// Blue Waters parameters (the shipped fixture reproduces these).
  static MachineParams blue_waters() { return {0.65e-6, 5.65e-9, 0.44e-9}; }
};

/// Everything the per-level formulas need.
struct LevelShape {
  Dims local_dims;   ///< n_d: local points per rank (model uses ceil(N/p))
  Dims global_dims;  ///< N_d
  Dims proc_dims;    ///< p_d
  int stencil_points = 9;  ///< n_s
  int colors = 4;          ///< n_c
  int nu1 = 2;
  int nu2 = 1;
};

struct CostBreakdown {
  double smooth = 0.0;
  double residual = 0.0;
  double restriction = 0.0;
  double interp = 0.0;
  double agglomerate = 0.0;
  double cgsolve = 0.0;
  double total = 0.0;
  std::int64_t messages = 0;
  std::int64_t bytes = 0;
};

/// Width-1 halo exchange in D dimensions: 2 D alpha + 2 sum_d n_d 8 beta.
double t_exchange(const LevelShape& s, const MachineParams& m, int D);

/// Colored Gauss-Seidel: 2 n_s prod(n) (nu1+nu2) gamma plus n_c (nu1+nu2)
/// exchanges.
double t_smooth(const LevelShape& s, const MachineParams& m);

/// 2 n_s prod(n) gamma plus one exchange.
double t_residual(const LevelShape& s, const MachineParams& m);

/// 2 n_s prod(n) gamma; restriction is communication-free.
double t_restrict(const LevelShape& s, const MachineParams& m);

/// Interpolation plus correction; `coarse_local` holds n_d of the level below
/// on this level's ranks.
double t_interp(const LevelShape& fine, const Dims& coarse_local,
                const MachineParams& m, int D);

/// Tree collective: ceil(log2 p) alpha + n (p-1)/p 8 beta.
double t_gather(const ProcBlock& block, const MachineParams& m);

/// Gather plus (non-redundant) mirrored scatter; zero without a block.
double t_agglomerate(const std::optional<ProcBlock>& block, RedistMode mode,
                     const MachineParams& m);

/// Final gather-to-one plus the stored-factorization Cholesky solve,
/// (prod N_d)^2 gamma.
double t_cgsolve(const GlobalGrid& coarse, const ProcBlock& block,
                 const MachineParams& m, RedistMode mode);

// ---------------------------------------------------------------------------
// Level layouts: the exact per-level rank geometry a plan induces
// ---------------------------------------------------------------------------

/// Proc-grid takeover: `proc` runs every level from `level` down to the next
/// takeover (or the bottom).
struct Takeover {
  ProcessorGrid proc;
  int level = 0;  ///< level index, 0 = coarsest
};

/// Per-level rank geometry: the active processor grid and the tensor cuts of
/// the data layout on it.  Fine level uses the near-uniform split; coarser
/// levels inherit the induced split, and a takeover level carries the
/// block-union layout of the gathered data.
struct LevelLayout {
  GlobalGrid grid;
  ProcessorGrid procs;
  std::vector<std::int64_t> cuts_x;
  std::vector<std::int64_t> cuts_y;
  bool redistributed = false;        ///< a gather produced this level's layout
  ProcessorGrid procs_above;         ///< ranks the gather collected from
  std::vector<std::int64_t> donor_cuts_x;  ///< their (coarsened) cuts
  std::vector<std::int64_t> donor_cuts_y;
};

/// Builds the per-level layouts for a plan given as takeover list (must
/// include the fine level; level 0 is forced onto a single task for the
/// direct solve).
std::vector<LevelLayout> plan_layouts(const GlobalGrid& fine,
                                      const std::vector<Takeover>& takeovers,
                                      int coarse_threshold = 3);

/// The model shape of one level: ceil(N/p) locals, five-point/two-color on
/// the finest level and nine-point/four-color below.
LevelShape shape_of(const std::vector<LevelLayout>& layouts, int level, int nu1,
                    int nu2);

/// Full Eq.-style V-cycle prediction over the laid-out levels.
CostBreakdown t_vcycle(const std::vector<LevelLayout>& layouts, int nu1, int nu2,
                       RedistMode mode, const MachineParams& m);

// ---------------------------------------------------------------------------
// Exact count accounting (reconciled against the simulator's event log)
// ---------------------------------------------------------------------------

struct LevelCounts {
  std::int64_t exchange_messages = 0;
  std::int64_t exchange_bytes = 0;
  std::int64_t gather_messages = 0;
  std::int64_t gather_bytes = 0;
  std::int64_t allgather_messages = 0;
  std::int64_t allgather_bytes = 0;
  std::int64_t scatter_messages = 0;
  std::int64_t scatter_bytes = 0;

  std::int64_t messages() const {
    return exchange_messages + gather_messages + allgather_messages +
           scatter_messages;
  }
  std::int64_t bytes() const {
    return exchange_bytes + gather_bytes + allgather_bytes + scatter_bytes;
  }
};

/// Message/byte counts per level implied by the model's communication terms
/// for `cycles` V-cycles: n_c (nu1+nu2) + 2 halo exchanges per level per
/// cycle (smoothing, residual, interpolation) over the actual rank tiling,
/// plus the per-block gather/scatter traffic at redistribution levels.
std::vector<LevelCounts> implied_counts(const std::vector<LevelLayout>& layouts,
                                        int nu1, int nu2, RedistMode mode,
                                        int cycles);

}  // namespace mgredist
