#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

/// @file grid.hpp
/// Grid, stencil-extent and processor-grid value types plus the partition
/// arithmetic shared by the solver, the performance model and the planner.

namespace mgredist {

inline constexpr int kMaxDims = 3;

/// Fixed-capacity tuple of per-dimension counts.  Supports 2-D and 3-D;
/// unused trailing entries are pinned to 1 so products stay well-defined.
struct Dims {
  int ndim = 2;
  std::array<std::int64_t, kMaxDims> v{1, 1, 1};

  static Dims of(std::int64_t x, std::int64_t y) { return Dims{2, {x, y, 1}}; }
  static Dims of(std::int64_t x, std::int64_t y, std::int64_t z) {
    return Dims{3, {x, y, z}};
  }

  std::int64_t operator[](int d) const { return v[static_cast<std::size_t>(d)]; }
  std::int64_t& operator[](int d) { return v[static_cast<std::size_t>(d)]; }

  std::int64_t product() const;
  std::int64_t sum() const;
  std::int64_t min() const;
  std::int64_t max() const;

  bool operator==(const Dims&) const = default;
  bool all_le(const Dims& other) const;

  /// "64x32" style rendering, used in tables and path notation.
  std::string str(const char* sep = "x") const;
};

/// Global point counts of one grid level.
struct GlobalGrid {
  Dims dims;

  explicit GlobalGrid(Dims d);
  GlobalGrid() : GlobalGrid(Dims::of(1, 1)) {}

  int ndim() const { return dims.ndim; }
  std::int64_t points() const { return dims.product(); }
  bool operator==(const GlobalGrid&) const = default;
};

/// One rank's share of a grid: local point counts plus global start indices.
struct LocalExtent {
  Dims dims;
  Dims offset;

  std::int64_t points() const { return dims.product(); }
  bool empty() const { return points() == 0; }
  bool operator==(const LocalExtent&) const = default;
};

/// Tensor-product rank layout.
struct ProcessorGrid {
  Dims dims;

  explicit ProcessorGrid(Dims d);
  ProcessorGrid() : ProcessorGrid(Dims::of(1, 1)) {}

  int ndim() const { return dims.ndim; }
  std::int64_t total() const { return dims.product(); }
  bool operator==(const ProcessorGrid&) const = default;
};

/// Group of ranks agglomerated into one coarse task, with the model's
/// block-size quantities.
struct ProcBlock {
  Dims ranks_per_dim;         ///< ceil(p_d_fine / p_d_coarse)
  std::int64_t block_size;    ///< ranks per block
  std::int64_t local_points;  ///< prod_d ceil(N_d / p_d_coarse)
};

/// Vertex-centered coarsening by a factor of two: N -> (N-1)/2 + 1.
/// Throws std::invalid_argument if any dimension is below 3.
GlobalGrid coarsen_grid(const GlobalGrid& g);

/// True when every dimension admits another coarsening step.
bool can_coarsen(const GlobalGrid& g);

/// The grid sequence from `fine` down to the coarsest level the solver will
/// keep, stopping once every dimension is at most `coarse_threshold` or the
/// grid cannot coarsen further.  Index 0 is the coarsest level, matching the
/// level numbering used throughout.
std::vector<GlobalGrid> coarsening_levels(const GlobalGrid& fine,
                                          int coarse_threshold = 3);

/// Near-uniform block split: in each dimension the first (N mod p) ranks own
/// ceil(N/p) points, the remainder floor(N/p).  Extents tile the grid exactly;
/// empty extents are allowed when p exceeds N.
LocalExtent partition(const GlobalGrid& g, const ProcessorGrid& p,
                      const Dims& rank_coord);

/// Per-dimension cut positions of the near-uniform split; size p+1 with
/// cuts.front()==0 and cuts.back()==n.
std::vector<std::int64_t> partition_cuts(std::int64_t n, std::int64_t p);

/// Cut positions of the coarse grid induced by a fine partition: a rank
/// owning fine columns [a,b) owns coarse columns [ceil(a/2), ceil(b/2)).
std::vector<std::int64_t> coarsen_cuts(const std::vector<std::int64_t>& cuts);

/// floor(N_d / p_d): the smallest local extent of the near-uniform split,
/// used by the redistribution trigger.
Dims min_local_dims(const GlobalGrid& g, const ProcessorGrid& p);

/// ceil(N_d / p_d): the agglomerated local problem size used by the model
/// and the enumeration tables.
Dims agglomerated_local(const GlobalGrid& g, const ProcessorGrid& p);

/// Block quantities for agglomerating `fine` ranks onto `coarse` ranks with
/// the grid `g` distributed on the coarse layout.
ProcBlock agglomerate_blocks(const ProcessorGrid& fine,
                             const ProcessorGrid& coarse, const GlobalGrid& g);

std::int64_t ceil_div(std::int64_t a, std::int64_t b);

}  // namespace mgredist
