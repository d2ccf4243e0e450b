#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mgredist/grid.hpp"
#include "mgredist/stencil.hpp"

/// @file mg.hpp
/// Serial reference multigrid: discretization, colored Gauss-Seidel,
/// operator-induced interpolation, Galerkin coarsening and the V-cycle with a
/// stored dense Cholesky factorization on the coarsest level.

namespace mgredist {

/// Scalar field over a rectangular extent.  Reads outside the extent return
/// zero, which doubles as the homogeneous-Dirichlet halo for the serial
/// kernels.
struct GridFunction {
  LocalExtent extent;
  std::vector<double> values;

  static GridFunction zeros(const LocalExtent& ext);
  static GridFunction zeros(const GlobalGrid& g);

  bool contains(std::int64_t gi, std::int64_t gj) const {
    return gi >= extent.offset[0] && gi < extent.offset[0] + extent.dims[0] &&
           gj >= extent.offset[1] && gj < extent.offset[1] + extent.dims[1];
  }
  std::size_t index(std::int64_t gi, std::int64_t gj) const {
    return static_cast<std::size_t>((gj - extent.offset[1]) * extent.dims[0] +
                                    (gi - extent.offset[0]));
  }
  double at(std::int64_t gi, std::int64_t gj) const {
    return contains(gi, gj) ? values[index(gi, gj)] : 0.0;
  }
  double& ref(std::int64_t gi, std::int64_t gj) { return values[index(gi, gj)]; }

  double max_norm() const;
  double l2_norm() const;
};

enum class InterpMode { Bilinear, OperatorInduced };

/// Anisotropic diffusion model problem -div(D grad u) = f with
/// D = diag(1/r, r) and homogeneous Dirichlet walls.  `cell_aspect` is
/// h_y / h_x; the stencil depends on the spacings only through that ratio.
struct DiffusionProblem {
  GlobalGrid grid;
  double anisotropy = 1.0;
  double cell_aspect = 1.0;
  std::function<double(double, double)> forcing = [](double, double) {
    return 1.0;
  };

  /// Spacings implied by grid and aspect (h_x anchored to 1/(N_x - 1)).
  double hx() const { return 1.0 / static_cast<double>(grid.dims[0] - 1); }
  double hy() const { return cell_aspect * hx(); }

  /// Unit-square mesh: the aspect follows from the point counts.
  static DiffusionProblem unit_square(const GlobalGrid& g, double r);
  /// Explicitly stretched cells, e.g. tall cells with cell_aspect > 1.
  static DiffusionProblem stretched(const GlobalGrid& g, double r,
                                    double cell_aspect);
};

/// Five-point finite-volume discretization.  Interior rows carry
/// W = E = -(1/r) h_y/h_x and S = N = -r h_x/h_y with C = -(W+E+S+N);
/// connections into the Dirichlet boundary are eliminated (the diagonal keeps
/// the full flux sum) and boundary rows are identity.
StencilField discretize(const DiffusionProblem& p);

/// Right-hand side sampled as f(x_i, y_j) * h_x * h_y at interior points.
GridFunction discretize_rhs(const DiffusionProblem& p);

/// `sweeps` colored Gauss-Seidel sweeps: red-black for five-point operators,
/// four colors for nine-point ones, lexicographic within each color.
GridFunction relax(const StencilField& A, GridFunction x, const GridFunction& b,
                   int sweeps);

GridFunction residual(const StencilField& A, const GridFunction& x,
                      const GridFunction& b);

/// Interpolation weights for the coarse grid of A's grid.  OperatorInduced
/// collapses the stencil perpendicular to each coarse line (flux continuity);
/// rows with a vanishing collapsed center fall back to bilinear weights and
/// are counted in the result.
InterpField build_interp(const StencilField& A, InterpMode mode);

/// Variational coarse operator P^T A P as a nine-point stencil.
StencilField galerkin(const StencilField& A, const InterpField& P);

GridFunction restrict_residual(const GridFunction& r, const InterpField& P);

/// x += P x_c with injection at coarse images; edge and cell-center points
/// add the r/C correction term.
GridFunction interp_correct(GridFunction x, const GridFunction& xc,
                            const GridFunction& r, const StencilField& A,
                            const InterpField& P);

/// Dense Cholesky factorization (lower triangular, row-major) stored at setup
/// for the coarsest-level direct solve.
class DenseCholesky {
 public:
  DenseCholesky() = default;
  /// Factors a symmetric positive definite matrix given row-major.
  static DenseCholesky factor(const std::vector<double>& a, std::int64_t n);
  std::vector<double> solve(std::vector<double> rhs) const;
  std::int64_t size() const { return n_; }

 private:
  std::int64_t n_ = 0;
  std::vector<double> l_;
};

/// Row-major dense form of a stencil operator (used for the coarse solve).
std::vector<double> assemble_dense(const StencilField& A);

struct MGLevel {
  GlobalGrid grid;
  StencilField A;
  InterpField P;  // interpolation from the next-coarser level; empty at level 0
};

struct MGHierarchy {
  std::vector<MGLevel> levels;  // levels[0] is the coarsest
  int nu1 = 2;
  int nu2 = 1;
  int coarse_threshold = 3;
  InterpMode interp_mode = InterpMode::OperatorInduced;
  DenseCholesky coarse_solver;

  int num_levels() const { return static_cast<int>(levels.size()); }
  const GlobalGrid& fine_grid() const { return levels.back().grid; }
  std::int64_t interp_fallbacks() const;
};

/// Coarsens until every dimension is at most `coarse_threshold` (or the grid
/// cannot coarsen), building Galerkin operators level by level and factoring
/// the coarsest operator.
MGHierarchy build_hierarchy(StencilField A_fine, const GlobalGrid& fine,
                            int nu1, int nu2, InterpMode mode,
                            int coarse_threshold = 3);

/// One V(nu1, nu2) cycle.
GridFunction vcycle(const MGHierarchy& h, GridFunction x, const GridFunction& b);

struct CycleStats {
  std::vector<double> residual_norms;  // L2; [0] is the initial residual
  std::vector<double> factors;         // norms[k+1] / norms[k]
};

/// Runs `cycles` V-cycles from `x`, recording residual norms; `x` is updated
/// in place.
CycleStats run_vcycles(const MGHierarchy& h, GridFunction& x,
                       const GridFunction& b, int cycles);

/// Plain-text hierarchy fixture format: one grid-point stencil or weight
/// tuple per line, fields in storage order, round-trip exact.
void dump_hierarchy(std::ostream& os, const MGHierarchy& h);
MGHierarchy load_hierarchy(std::istream& is);

}  // namespace mgredist
