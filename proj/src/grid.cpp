#include "mgredist/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace mgredist {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

std::int64_t Dims::product() const {
  std::int64_t r = 1;
  for (int d = 0; d < ndim; ++d) r *= (*this)[d];
  return r;
}

std::int64_t Dims::sum() const {
  std::int64_t r = 0;
  for (int d = 0; d < ndim; ++d) r += (*this)[d];
  return r;
}

std::int64_t Dims::min() const {
  std::int64_t r = (*this)[0];
  for (int d = 1; d < ndim; ++d) r = std::min(r, (*this)[d]);
  return r;
}

std::int64_t Dims::max() const {
  std::int64_t r = (*this)[0];
  for (int d = 1; d < ndim; ++d) r = std::max(r, (*this)[d]);
  return r;
}

bool Dims::all_le(const Dims& other) const {
  for (int d = 0; d < ndim; ++d)
    if ((*this)[d] > other[d]) return false;
  return true;
}

std::string Dims::str(const char* sep) const {
  std::string s;
  for (int d = 0; d < ndim; ++d) {
    if (d) s += sep;
    s += std::to_string((*this)[d]);
  }
  return s;
}

GlobalGrid::GlobalGrid(Dims d) : dims(d) {
  if (d.ndim != 2 && d.ndim != 3)
    throw std::invalid_argument("GlobalGrid: dimension count must be 2 or 3");
  for (int i = 0; i < d.ndim; ++i)
    if (d[i] < 1) throw std::invalid_argument("GlobalGrid: extents must be >= 1");
}

ProcessorGrid::ProcessorGrid(Dims d) : dims(d) {
  if (d.ndim != 2 && d.ndim != 3)
    throw std::invalid_argument("ProcessorGrid: dimension count must be 2 or 3");
  for (int i = 0; i < d.ndim; ++i)
    if (d[i] < 1) throw std::invalid_argument("ProcessorGrid: ranks must be >= 1");
}

bool can_coarsen(const GlobalGrid& g) {
  for (int d = 0; d < g.ndim(); ++d)
    if (g.dims[d] < 3) return false;
  return true;
}

GlobalGrid coarsen_grid(const GlobalGrid& g) {
  if (!can_coarsen(g))
    throw std::invalid_argument("coarsen_grid: every dimension must be >= 3");
  Dims c = g.dims;
  for (int d = 0; d < g.ndim(); ++d) c[d] = (g.dims[d] - 1) / 2 + 1;
  return GlobalGrid(c);
}

std::vector<GlobalGrid> coarsening_levels(const GlobalGrid& fine,
                                          int coarse_threshold) {
  std::vector<GlobalGrid> grids{fine};
  while (can_coarsen(grids.back()) &&
         grids.back().dims.max() > coarse_threshold)
    grids.push_back(coarsen_grid(grids.back()));
  std::reverse(grids.begin(), grids.end());
  return grids;
}

std::vector<std::int64_t> partition_cuts(std::int64_t n, std::int64_t p) {
  std::vector<std::int64_t> cuts(static_cast<std::size_t>(p) + 1, 0);
  const std::int64_t lo = n / p;
  const std::int64_t rem = n % p;
  for (std::int64_t k = 0; k < p; ++k)
    cuts[static_cast<std::size_t>(k) + 1] =
        cuts[static_cast<std::size_t>(k)] + lo + (k < rem ? 1 : 0);
  return cuts;
}

std::vector<std::int64_t> coarsen_cuts(const std::vector<std::int64_t>& cuts) {
  std::vector<std::int64_t> out(cuts.size());
  for (std::size_t i = 0; i < cuts.size(); ++i) out[i] = (cuts[i] + 1) / 2;
  return out;
}

LocalExtent partition(const GlobalGrid& g, const ProcessorGrid& p,
                      const Dims& rank_coord) {
  LocalExtent e;
  e.dims.ndim = e.offset.ndim = g.ndim();
  for (int d = 0; d < g.ndim(); ++d) {
    if (rank_coord[d] < 0 || rank_coord[d] >= p.dims[d])
      throw std::invalid_argument("partition: rank coordinate out of range");
    const std::int64_t n = g.dims[d];
    const std::int64_t q = p.dims[d];
    const std::int64_t lo = n / q;
    const std::int64_t rem = n % q;
    const std::int64_t k = rank_coord[d];
    e.dims[d] = lo + (k < rem ? 1 : 0);
    e.offset[d] = k * lo + std::min(k, rem);
  }
  return e;
}

Dims min_local_dims(const GlobalGrid& g, const ProcessorGrid& p) {
  Dims m;
  m.ndim = g.ndim();
  for (int d = 0; d < g.ndim(); ++d) m[d] = g.dims[d] / p.dims[d];
  return m;
}

Dims agglomerated_local(const GlobalGrid& g, const ProcessorGrid& p) {
  Dims m;
  m.ndim = g.ndim();
  for (int d = 0; d < g.ndim(); ++d) m[d] = ceil_div(g.dims[d], p.dims[d]);
  return m;
}

ProcBlock agglomerate_blocks(const ProcessorGrid& fine,
                             const ProcessorGrid& coarse, const GlobalGrid& g) {
  if (!coarse.dims.all_le(fine.dims))
    throw std::invalid_argument(
        "agglomerate_blocks: coarse ranks must not exceed fine ranks in any "
        "dimension");
  ProcBlock b;
  b.ranks_per_dim.ndim = fine.ndim();
  for (int d = 0; d < fine.ndim(); ++d)
    b.ranks_per_dim[d] = ceil_div(fine.dims[d], coarse.dims[d]);
  b.block_size = b.ranks_per_dim.product();
  b.local_points = agglomerated_local(g, coarse).product();
  return b;
}

}  // namespace mgredist
