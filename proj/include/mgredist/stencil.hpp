#pragma once

#include <cstdint>
#include <vector>

#include "mgredist/grid.hpp"

/// @file stencil.hpp
/// Stencil-operator and interpolation-weight fields.  Coefficient layout is
/// fixed (compass order) so serialized fixtures are bit-stable.

namespace mgredist {

enum class StencilPattern { FivePoint, NinePoint };

/// Per-point stencil coefficient slots, in storage order.
namespace sten {
inline constexpr int C = 0, W = 1, E = 2, S = 3, N = 4;
inline constexpr int SW = 5, SE = 6, NW = 7, NE = 8;
inline constexpr int kEntries = 9;
/// Index offset of each slot, (di, dj).
inline constexpr int kOffset[kEntries][2] = {
    {0, 0}, {-1, 0}, {1, 0}, {0, -1}, {0, 1},
    {-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
/// Slot holding the transposed connection (entry of the row at the target
/// point that points back here).
inline constexpr int kTranspose[kEntries] = {C, E, W, N, S, NE, NW, SE, SW};
int entry_of(std::int64_t di, std::int64_t dj);
}  // namespace sten

/// Grid-point operator coefficients (the per-level matrices).  Off-diagonal
/// slots store the actual matrix entries (negative for M-matrices); five-point
/// fields keep zero corners so every kernel runs the same nine-term update.
struct StencilField {
  StencilPattern pattern = StencilPattern::FivePoint;
  LocalExtent extent;
  std::vector<double> coeff;  // sten::kEntries per point

  static StencilField zeros(StencilPattern pat, const LocalExtent& ext);

  int points() const { return pattern == StencilPattern::FivePoint ? 5 : 9; }
  int colors() const { return pattern == StencilPattern::FivePoint ? 2 : 4; }

  bool contains(std::int64_t gi, std::int64_t gj) const {
    return gi >= extent.offset[0] && gi < extent.offset[0] + extent.dims[0] &&
           gj >= extent.offset[1] && gj < extent.offset[1] + extent.dims[1];
  }
  std::size_t index(std::int64_t gi, std::int64_t gj) const {
    return static_cast<std::size_t>(
        ((gj - extent.offset[1]) * extent.dims[0] + (gi - extent.offset[0])) *
        sten::kEntries);
  }
  const double* row(std::int64_t gi, std::int64_t gj) const {
    return coeff.data() + index(gi, gj);
  }
  double* row(std::int64_t gi, std::int64_t gj) {
    return coeff.data() + index(gi, gj);
  }
  double at(std::int64_t gi, std::int64_t gj, int entry) const {
    return coeff[index(gi, gj) + static_cast<std::size_t>(entry)];
  }
};

/// Interpolation weight slots stored at each coarse point: the coarse point's
/// contribution to the surrounding fine points.
namespace iw {
inline constexpr int NW = 0, N = 1, NE = 2, W = 3, E = 4, SW = 5, S = 6, SE = 7;
inline constexpr int kSlots = 8;
/// Fine-point target of each slot relative to the coarse point's fine image:
/// fine = (2I + di, 2J + dj).
inline constexpr int kTarget[kSlots][2] = {
    {-1, 1}, {0, 1}, {1, 1}, {-1, 0}, {1, 0}, {-1, -1}, {0, -1}, {1, -1}};
}  // namespace iw

/// Interpolation weights stored at the coarse points (one 8-tuple each), plus
/// implicit unit injection to the coincident fine point.
struct InterpField {
  LocalExtent coarse_extent;
  std::vector<double> weights;  // iw::kSlots per coarse point
  std::int64_t bilinear_fallbacks = 0;  // degenerate rows replaced per point

  static InterpField zeros(const LocalExtent& ext);

  bool contains(std::int64_t ci, std::int64_t cj) const {
    return ci >= coarse_extent.offset[0] &&
           ci < coarse_extent.offset[0] + coarse_extent.dims[0] &&
           cj >= coarse_extent.offset[1] &&
           cj < coarse_extent.offset[1] + coarse_extent.dims[1];
  }
  std::size_t index(std::int64_t ci, std::int64_t cj) const {
    return static_cast<std::size_t>(((cj - coarse_extent.offset[1]) *
                                         coarse_extent.dims[0] +
                                     (ci - coarse_extent.offset[0])) *
                                    iw::kSlots);
  }
  double at(std::int64_t ci, std::int64_t cj, int slot) const {
    return weights[index(ci, cj) + static_cast<std::size_t>(slot)];
  }
  double& at(std::int64_t ci, std::int64_t cj, int slot) {
    return weights[index(ci, cj) + static_cast<std::size_t>(slot)];
  }
  double at_or_zero(std::int64_t ci, std::int64_t cj, int slot) const {
    return contains(ci, cj) ? at(ci, cj, slot) : 0.0;
  }

  /// Entry P(fine <- coarse); zero when the fine point is not a neighbor of
  /// the coarse point's image.  This is the reference definition the stencil
  /// kernels and the dense oracles agree on.
  double weight_to(std::int64_t ci, std::int64_t cj, std::int64_t fi,
                   std::int64_t fj) const;
};

}  // namespace mgredist
