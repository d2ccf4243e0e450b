#include "mgredist/mg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mgredist/detail/stencil_ops.hpp"

namespace mgredist {

namespace sten {
int entry_of(std::int64_t di, std::int64_t dj) {
  for (int e = 0; e < kEntries; ++e)
    if (kOffset[e][0] == di && kOffset[e][1] == dj) return e;
  return -1;
}
}  // namespace sten

StencilField StencilField::zeros(StencilPattern pat, const LocalExtent& ext) {
  StencilField f;
  f.pattern = pat;
  f.extent = ext;
  f.coeff.assign(static_cast<std::size_t>(ext.points()) * sten::kEntries, 0.0);
  return f;
}

InterpField InterpField::zeros(const LocalExtent& ext) {
  InterpField p;
  p.coarse_extent = ext;
  p.weights.assign(static_cast<std::size_t>(ext.points()) * iw::kSlots, 0.0);
  return p;
}

double InterpField::weight_to(std::int64_t ci, std::int64_t cj, std::int64_t fi,
                              std::int64_t fj) const {
  if (!contains(ci, cj)) return 0.0;
  const std::int64_t di = fi - 2 * ci, dj = fj - 2 * cj;
  if (di == 0 && dj == 0) return 1.0;  // injection
  for (int s = 0; s < iw::kSlots; ++s)
    if (iw::kTarget[s][0] == di && iw::kTarget[s][1] == dj) return at(ci, cj, s);
  return 0.0;
}

GridFunction GridFunction::zeros(const LocalExtent& ext) {
  GridFunction g;
  g.extent = ext;
  g.values.assign(static_cast<std::size_t>(ext.points()), 0.0);
  return g;
}

GridFunction GridFunction::zeros(const GlobalGrid& g) {
  LocalExtent ext;
  ext.dims = g.dims;
  ext.offset = Dims::of(0, 0);
  return zeros(ext);
}

double GridFunction::max_norm() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return m;
}

double GridFunction::l2_norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

DiffusionProblem DiffusionProblem::unit_square(const GlobalGrid& g, double r) {
  DiffusionProblem p;
  p.grid = g;
  p.anisotropy = r;
  p.cell_aspect = static_cast<double>(g.dims[0] - 1) /
                  static_cast<double>(g.dims[1] - 1);
  return p;
}

DiffusionProblem DiffusionProblem::stretched(const GlobalGrid& g, double r,
                                             double cell_aspect) {
  DiffusionProblem p;
  p.grid = g;
  p.anisotropy = r;
  p.cell_aspect = cell_aspect;
  return p;
}

StencilField discretize(const DiffusionProblem& p) {
  if (!(p.anisotropy > 0.0))
    throw std::invalid_argument("discretize: anisotropy ratio must be > 0");
  if (p.grid.dims[0] < 3 || p.grid.dims[1] < 3)
    throw std::invalid_argument("discretize: need at least 3 points per dimension");

  const std::int64_t nx = p.grid.dims[0], ny = p.grid.dims[1];
  const double wcoef = (1.0 / p.anisotropy) * p.cell_aspect;  // (1/r) h_y/h_x
  const double scoef = p.anisotropy / p.cell_aspect;          // r h_x/h_y

  LocalExtent ext;
  ext.dims = p.grid.dims;
  ext.offset = Dims::of(0, 0);
  StencilField A = StencilField::zeros(StencilPattern::FivePoint, ext);
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i) {
      double* s = A.row(i, j);
      const bool boundary = i == 0 || i == nx - 1 || j == 0 || j == ny - 1;
      if (boundary) {
        s[sten::C] = 1.0;
        continue;
      }
      // Connections into the Dirichlet wall are eliminated; the diagonal
      // keeps the full flux sum.
      s[sten::C] = 2.0 * wcoef + 2.0 * scoef;
      s[sten::W] = (i == 1) ? 0.0 : -wcoef;
      s[sten::E] = (i == nx - 2) ? 0.0 : -wcoef;
      s[sten::S] = (j == 1) ? 0.0 : -scoef;
      s[sten::N] = (j == ny - 2) ? 0.0 : -scoef;
    }
  return A;
}

GridFunction discretize_rhs(const DiffusionProblem& p) {
  const std::int64_t nx = p.grid.dims[0], ny = p.grid.dims[1];
  const double hx = p.hx(), hy = p.hy();
  GridFunction b = GridFunction::zeros(p.grid);
  for (std::int64_t j = 1; j < ny - 1; ++j)
    for (std::int64_t i = 1; i < nx - 1; ++i)
      b.ref(i, j) = p.forcing(static_cast<double>(i) * hx,
                              static_cast<double>(j) * hy) *
                    hx * hy;
  return b;
}

// ---------------------------------------------------------------------------
// Pointwise kernels on whole-grid functions
// ---------------------------------------------------------------------------

namespace {

void require_nonzero_centers(const StencilField& A) {
  const std::int64_t nx = A.extent.dims[0], ny = A.extent.dims[1];
  for (std::int64_t j = A.extent.offset[1]; j < A.extent.offset[1] + ny; ++j)
    for (std::int64_t i = A.extent.offset[0]; i < A.extent.offset[0] + nx; ++i)
      if (A.at(i, j, sten::C) == 0.0)
        throw std::domain_error("relax: zero center coefficient at (" +
                                std::to_string(i) + "," + std::to_string(j) +
                                ")");
}

struct ReadFn {
  const GridFunction& g;
  double operator()(std::int64_t i, std::int64_t j) const { return g.at(i, j); }
};
struct WriteFn {
  GridFunction& g;
  void operator()(std::int64_t i, std::int64_t j, double v) const {
    g.ref(i, j) = v;
  }
};

void relax_in_place(const StencilField& A, GridFunction& x,
                    const GridFunction& b, int sweeps) {
  require_nonzero_centers(A);
  const std::int64_t i0 = A.extent.offset[0];
  const std::int64_t j0 = A.extent.offset[1];
  const std::int64_t i1 = i0 + A.extent.dims[0];
  const std::int64_t j1 = j0 + A.extent.dims[1];
  const int nc = A.colors();
  for (int sweep = 0; sweep < sweeps; ++sweep)
    for (int color = 0; color < nc; ++color)
      kernels::relax_color(A, ReadFn{x}, WriteFn{x}, ReadFn{b}, i0, i1, j0, j1,
                           color, nc);
}

void interp_correct_in_place(GridFunction& x, const GridFunction& xc,
                             const GridFunction& r, const StencilField& A,
                             const InterpField& P) {
  require_nonzero_centers(A);
  const std::int64_t i0 = A.extent.offset[0];
  const std::int64_t j0 = A.extent.offset[1];
  kernels::interp_correct_rect(P, A, ReadFn{xc}, ReadFn{r}, ReadFn{x},
                               WriteFn{x}, i0, i0 + A.extent.dims[0], j0,
                               j0 + A.extent.dims[1]);
}

}  // namespace

GridFunction relax(const StencilField& A, GridFunction x, const GridFunction& b,
                   int sweeps) {
  relax_in_place(A, x, b, sweeps);
  return x;
}

GridFunction residual(const StencilField& A, const GridFunction& x,
                      const GridFunction& b) {
  GridFunction r = GridFunction::zeros(A.extent);
  kernels::residual_rect(A, ReadFn{x}, ReadFn{b}, WriteFn{r},
                         A.extent.offset[0], A.extent.offset[0] + A.extent.dims[0],
                         A.extent.offset[1], A.extent.offset[1] + A.extent.dims[1]);
  return r;
}

GridFunction restrict_residual(const GridFunction& r, const InterpField& P) {
  GridFunction bc = GridFunction::zeros(P.coarse_extent);
  kernels::restrict_rect(P, ReadFn{r}, WriteFn{bc}, P.coarse_extent.offset[0],
                         P.coarse_extent.offset[0] + P.coarse_extent.dims[0],
                         P.coarse_extent.offset[1],
                         P.coarse_extent.offset[1] + P.coarse_extent.dims[1]);
  return bc;
}

GridFunction interp_correct(GridFunction x, const GridFunction& xc,
                            const GridFunction& r, const StencilField& A,
                            const InterpField& P) {
  interp_correct_in_place(x, xc, r, A, P);
  return x;
}

// ---------------------------------------------------------------------------
// Interpolation construction
// ---------------------------------------------------------------------------

namespace {

double row_abs_sum(const double* s) {
  double t = 0.0;
  for (int e = 0; e < sten::kEntries; ++e) t += std::fabs(s[e]);
  return t;
}

}  // namespace

InterpField build_interp(const StencilField& A, InterpMode mode) {
  if (A.extent.offset != Dims::of(0, 0))
    throw std::invalid_argument("build_interp: expects a whole-grid operator");
  const std::int64_t nx = A.extent.dims[0], ny = A.extent.dims[1];
  if (nx < 3 || ny < 3)
    throw std::invalid_argument("build_interp: grid dimensions must be >= 3");
  const std::int64_t ncx = (nx - 1) / 2 + 1, ncy = (ny - 1) / 2 + 1;

  LocalExtent cext;
  cext.dims = Dims::of(ncx, ncy);
  cext.offset = Dims::of(0, 0);
  InterpField P = InterpField::zeros(cext);

  const double degenerate_tol = 1e3 * std::numeric_limits<double>::epsilon();
  const auto fine_boundary = [&](std::int64_t i, std::int64_t j) {
    return i == 0 || i == nx - 1 || j == 0 || j == ny - 1;
  };
  const auto coarse_boundary = [&](std::int64_t I, std::int64_t J) {
    return fine_boundary(2 * I, 2 * J);
  };
  // Bilinear weight toward one coarse contributor, with the Dirichlet rules:
  // nothing interpolates into a wall point and wall coarse points contribute
  // nothing.
  const auto bilin = [&](std::int64_t fi, std::int64_t fj, std::int64_t I,
                         std::int64_t J, double base) {
    if (fine_boundary(fi, fj)) return 0.0;
    if (I < 0 || I >= ncx || J < 0 || J >= ncy || coarse_boundary(I, J))
      return 0.0;
    return base;
  };
  const bool oper = mode == InterpMode::OperatorInduced;

  // x-embedded fine points (odd, even): collapse columns onto the coarse line.
  for (std::int64_t J = 0; J < ncy; ++J) {
    const std::int64_t j = 2 * J;
    for (std::int64_t i = 1; i < nx; i += 2) {
      const std::int64_t I = (i - 1) / 2;
      double ww, we;
      bool use_bilin = !oper;
      if (oper) {
        const double* s = A.row(i, j);
        const double lhs = s[sten::W] + s[sten::NW] + s[sten::SW];
        const double rhs = s[sten::E] + s[sten::NE] + s[sten::SE];
        const double cc = s[sten::C] + s[sten::N] + s[sten::S];
        if (std::fabs(cc) < degenerate_tol * row_abs_sum(s)) {
          use_bilin = true;
          ++P.bilinear_fallbacks;
        } else {
          ww = -lhs / cc;
          we = -rhs / cc;
        }
      }
      if (use_bilin) {
        ww = bilin(i, j, I, J, 0.5);
        we = bilin(i, j, I + 1, J, 0.5);
      }
      P.at(I, J, iw::E) = ww;
      if (I + 1 < ncx) P.at(I + 1, J, iw::W) = we;
    }
  }

  // y-embedded fine points (even, odd).
  for (std::int64_t j = 1; j < ny; j += 2) {
    const std::int64_t J = (j - 1) / 2;
    for (std::int64_t I = 0; I < ncx; ++I) {
      const std::int64_t i = 2 * I;
      double ws, wn;
      bool use_bilin = !oper;
      if (oper) {
        const double* s = A.row(i, j);
        const double dow = s[sten::S] + s[sten::SW] + s[sten::SE];
        const double up = s[sten::N] + s[sten::NW] + s[sten::NE];
        const double cc = s[sten::C] + s[sten::W] + s[sten::E];
        if (std::fabs(cc) < degenerate_tol * row_abs_sum(s)) {
          use_bilin = true;
          ++P.bilinear_fallbacks;
        } else {
          ws = -dow / cc;
          wn = -up / cc;
        }
      }
      if (use_bilin) {
        ws = bilin(i, j, I, J, 0.5);
        wn = bilin(i, j, I, J + 1, 0.5);
      }
      P.at(I, J, iw::N) = ws;
      if (J + 1 < ncy) P.at(I, J + 1, iw::S) = wn;
    }
  }

  // Cell centers (odd, odd): full local row with the embedded-point
  // interpolants substituted, so constants survive for zero-row-sum rows.
  for (std::int64_t j = 1; j < ny; j += 2) {
    const std::int64_t J = (j - 1) / 2;
    for (std::int64_t i = 1; i < nx; i += 2) {
      const std::int64_t I = (i - 1) / 2;
      double wsw, wse, wnw, wne;
      bool use_bilin = !oper;
      if (oper) {
        const double* s = A.row(i, j);
        if (std::fabs(s[sten::C]) < degenerate_tol * row_abs_sum(s)) {
          use_bilin = true;
          ++P.bilinear_fallbacks;
        } else {
          const double ps = P.at_or_zero(I, J, iw::N);
          const double pn = P.at_or_zero(I, J + 1, iw::S);
          const double qs = P.at_or_zero(I + 1, J, iw::N);
          const double qn = P.at_or_zero(I + 1, J + 1, iw::S);
          const double rw = P.at_or_zero(I, J, iw::E);
          const double re = P.at_or_zero(I + 1, J, iw::W);
          const double tw = P.at_or_zero(I, J + 1, iw::E);
          const double te = P.at_or_zero(I + 1, J + 1, iw::W);
          wsw = -(s[sten::SW] + s[sten::W] * ps + s[sten::S] * rw) / s[sten::C];
          wse = -(s[sten::SE] + s[sten::E] * qs + s[sten::S] * re) / s[sten::C];
          wnw = -(s[sten::NW] + s[sten::W] * pn + s[sten::N] * tw) / s[sten::C];
          wne = -(s[sten::NE] + s[sten::E] * qn + s[sten::N] * te) / s[sten::C];
        }
      }
      if (use_bilin) {
        wsw = bilin(i, j, I, J, 0.25);
        wse = bilin(i, j, I + 1, J, 0.25);
        wnw = bilin(i, j, I, J + 1, 0.25);
        wne = bilin(i, j, I + 1, J + 1, 0.25);
      }
      P.at(I, J, iw::NE) = wsw;
      if (I + 1 < ncx) P.at(I + 1, J, iw::NW) = wse;
      if (J + 1 < ncy) P.at(I, J + 1, iw::SE) = wnw;
      if (I + 1 < ncx && J + 1 < ncy) P.at(I + 1, J + 1, iw::SW) = wne;
    }
  }

  return P;
}

// ---------------------------------------------------------------------------
// Galerkin triple product
// ---------------------------------------------------------------------------

StencilField galerkin(const StencilField& A, const InterpField& P) {
  const std::int64_t nx = A.extent.dims[0], ny = A.extent.dims[1];
  const std::int64_t ncx = P.coarse_extent.dims[0];
  const std::int64_t ncy = P.coarse_extent.dims[1];
  StencilField Ac = StencilField::zeros(StencilPattern::NinePoint,
                                        P.coarse_extent);

  for (std::int64_t J = 0; J < ncy; ++J)
    for (std::int64_t I = 0; I < ncx; ++I) {
      double* out = Ac.row(I, J);
      for (std::int64_t fj = 2 * J - 1; fj <= 2 * J + 1; ++fj)
        for (std::int64_t fi = 2 * I - 1; fi <= 2 * I + 1; ++fi) {
          if (fi < 0 || fi >= nx || fj < 0 || fj >= ny) continue;
          const double pf = P.weight_to(I, J, fi, fj);
          if (pf == 0.0) continue;
          const double* s = A.row(fi, fj);
          for (int e = 0; e < sten::kEntries; ++e) {
            const double a = s[e];
            if (a == 0.0) continue;
            const std::int64_t gi = fi + sten::kOffset[e][0];
            const std::int64_t gj = fj + sten::kOffset[e][1];
            if (gi < 0 || gi >= nx || gj < 0 || gj >= ny) continue;
            // coarse points whose interpolation patch covers (gi, gj)
            for (std::int64_t cJ = gj / 2; cJ <= (gj + 1) / 2; ++cJ)
              for (std::int64_t cI = gi / 2; cI <= (gi + 1) / 2; ++cI) {
                if (cI < 0 || cI >= ncx || cJ < 0 || cJ >= ncy) continue;
                const double pg = P.weight_to(cI, cJ, gi, gj);
                if (pg == 0.0) continue;
                const int entry = sten::entry_of(cI - I, cJ - J);
                if (entry < 0) continue;
                out[entry] += pf * a * pg;
              }
          }
        }
    }
  return Ac;
}

// ---------------------------------------------------------------------------
// Dense coarse solve
// ---------------------------------------------------------------------------

DenseCholesky DenseCholesky::factor(const std::vector<double>& a,
                                    std::int64_t n) {
  DenseCholesky c;
  c.n_ = n;
  c.l_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  auto L = [&](std::int64_t i, std::int64_t j) -> double& {
    return c.l_[static_cast<std::size_t>(i * n + j)];
  };
  for (std::int64_t k = 0; k < n; ++k) {
    double d = a[static_cast<std::size_t>(k * n + k)];
    for (std::int64_t m = 0; m < k; ++m) d -= L(k, m) * L(k, m);
    if (!(d > 0.0))
      throw std::runtime_error("DenseCholesky: matrix is not positive definite");
    L(k, k) = std::sqrt(d);
    for (std::int64_t i = k + 1; i < n; ++i) {
      double v = a[static_cast<std::size_t>(i * n + k)];
      for (std::int64_t m = 0; m < k; ++m) v -= L(i, m) * L(k, m);
      L(i, k) = v / L(k, k);
    }
  }
  return c;
}

std::vector<double> DenseCholesky::solve(std::vector<double> rhs) const {
  auto L = [&](std::int64_t i, std::int64_t j) {
    return l_[static_cast<std::size_t>(i * n_ + j)];
  };
  for (std::int64_t i = 0; i < n_; ++i) {
    double v = rhs[static_cast<std::size_t>(i)];
    for (std::int64_t m = 0; m < i; ++m) v -= L(i, m) * rhs[static_cast<std::size_t>(m)];
    rhs[static_cast<std::size_t>(i)] = v / L(i, i);
  }
  for (std::int64_t i = n_ - 1; i >= 0; --i) {
    double v = rhs[static_cast<std::size_t>(i)];
    for (std::int64_t m = i + 1; m < n_; ++m)
      v -= L(m, i) * rhs[static_cast<std::size_t>(m)];
    rhs[static_cast<std::size_t>(i)] = v / L(i, i);
  }
  return rhs;
}

std::vector<double> assemble_dense(const StencilField& A) {
  const std::int64_t nx = A.extent.dims[0], ny = A.extent.dims[1];
  const std::int64_t n = nx * ny;
  std::vector<double> m(static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
                        0.0);
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i) {
      const std::int64_t row = j * nx + i;
      const double* s = A.row(i + A.extent.offset[0], j + A.extent.offset[1]);
      for (int e = 0; e < sten::kEntries; ++e) {
        const std::int64_t gi = i + sten::kOffset[e][0];
        const std::int64_t gj = j + sten::kOffset[e][1];
        if (gi < 0 || gi >= nx || gj < 0 || gj >= ny) continue;
        m[static_cast<std::size_t>(row * n + gj * nx + gi)] = s[e];
      }
    }
  return m;
}

// ---------------------------------------------------------------------------
// Hierarchy and V-cycle
// ---------------------------------------------------------------------------

std::int64_t MGHierarchy::interp_fallbacks() const {
  std::int64_t t = 0;
  for (const auto& lv : levels) t += lv.P.bilinear_fallbacks;
  return t;
}

MGHierarchy build_hierarchy(StencilField A_fine, const GlobalGrid& fine,
                            int nu1, int nu2, InterpMode mode,
                            int coarse_threshold) {
  if (A_fine.extent.dims != fine.dims)
    throw std::invalid_argument("build_hierarchy: operator does not match grid");
  MGHierarchy h;
  h.nu1 = nu1;
  h.nu2 = nu2;
  h.interp_mode = mode;
  h.coarse_threshold = coarse_threshold;

  std::vector<MGLevel> levels;
  levels.push_back(MGLevel{fine, std::move(A_fine), InterpField{}});
  while (can_coarsen(levels.back().grid) &&
         levels.back().grid.dims.max() > coarse_threshold) {
    InterpField P = build_interp(levels.back().A, mode);
    StencilField Ac = galerkin(levels.back().A, P);
    levels.back().P = std::move(P);
    GlobalGrid cg = coarsen_grid(levels.back().grid);
    levels.push_back(MGLevel{cg, std::move(Ac), InterpField{}});
  }
  std::reverse(levels.begin(), levels.end());
  h.levels = std::move(levels);

  const auto& A0 = h.levels.front().A;
  h.coarse_solver =
      DenseCholesky::factor(assemble_dense(A0), A0.extent.points());
  return h;
}

namespace {

GridFunction coarse_solve(const MGHierarchy& h, const GridFunction& b0) {
  GridFunction x0 = GridFunction::zeros(b0.extent);
  x0.values = h.coarse_solver.solve(b0.values);
  return x0;
}

}  // namespace

GridFunction vcycle(const MGHierarchy& h, GridFunction x, const GridFunction& b) {
  const int L = h.num_levels();
  if (L == 1) return coarse_solve(h, b);

  std::vector<GridFunction> xs(static_cast<std::size_t>(L));
  std::vector<GridFunction> bs(static_cast<std::size_t>(L));
  std::vector<GridFunction> rs(static_cast<std::size_t>(L));
  xs[static_cast<std::size_t>(L - 1)] = std::move(x);
  bs[static_cast<std::size_t>(L - 1)] = b;

  for (int l = L - 1; l >= 1; --l) {
    const auto& lv = h.levels[static_cast<std::size_t>(l)];
    relax_in_place(lv.A, xs[static_cast<std::size_t>(l)],
                   bs[static_cast<std::size_t>(l)], h.nu1);
    rs[static_cast<std::size_t>(l)] =
        residual(lv.A, xs[static_cast<std::size_t>(l)],
                 bs[static_cast<std::size_t>(l)]);
    bs[static_cast<std::size_t>(l - 1)] =
        restrict_residual(rs[static_cast<std::size_t>(l)], lv.P);
    if (l - 1 > 0)
      xs[static_cast<std::size_t>(l - 1)] = GridFunction::zeros(
          h.levels[static_cast<std::size_t>(l - 1)].grid);
  }

  xs[0] = coarse_solve(h, bs[0]);

  for (int l = 1; l <= L - 1; ++l) {
    const auto& lv = h.levels[static_cast<std::size_t>(l)];
    interp_correct_in_place(xs[static_cast<std::size_t>(l)],
                            xs[static_cast<std::size_t>(l - 1)],
                            rs[static_cast<std::size_t>(l)], lv.A, lv.P);
    relax_in_place(lv.A, xs[static_cast<std::size_t>(l)],
                   bs[static_cast<std::size_t>(l)], h.nu2);
  }
  return std::move(xs[static_cast<std::size_t>(L - 1)]);
}

CycleStats run_vcycles(const MGHierarchy& h, GridFunction& x,
                       const GridFunction& b, int cycles) {
  CycleStats st;
  const auto& A = h.levels.back().A;
  st.residual_norms.push_back(residual(A, x, b).l2_norm());
  for (int c = 0; c < cycles; ++c) {
    x = vcycle(h, std::move(x), b);
    st.residual_norms.push_back(residual(A, x, b).l2_norm());
    const double prev = st.residual_norms[st.residual_norms.size() - 2];
    st.factors.push_back(prev > 0.0 ? st.residual_norms.back() / prev : 0.0);
  }
  return st;
}

// ---------------------------------------------------------------------------
// Textual fixture format
// ---------------------------------------------------------------------------

namespace {

void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << ' ' << buf;
}

}  // namespace

void dump_hierarchy(std::ostream& os, const MGHierarchy& h) {
  os << "mgh 1\n";
  os << "nu1 " << h.nu1 << " nu2 " << h.nu2 << " threshold "
     << h.coarse_threshold << " interp "
     << (h.interp_mode == InterpMode::Bilinear ? "bilinear" : "operator")
     << "\n";
  os << "levels " << h.num_levels() << "\n";
  for (int l = 0; l < h.num_levels(); ++l) {
    const auto& lv = h.levels[static_cast<std::size_t>(l)];
    os << "level " << l << " grid " << lv.grid.dims[0] << ' ' << lv.grid.dims[1]
       << " pattern " << lv.A.points() << "\n";
    for (std::int64_t j = 0; j < lv.grid.dims[1]; ++j)
      for (std::int64_t i = 0; i < lv.grid.dims[0]; ++i) {
        os << "A " << i << ' ' << j;
        const double* s = lv.A.row(i, j);
        for (int e = 0; e < sten::kEntries; ++e) put(os, s[e]);
        os << "\n";
      }
    if (l >= 1) {
      const auto& P = lv.P;
      for (std::int64_t J = 0; J < P.coarse_extent.dims[1]; ++J)
        for (std::int64_t I = 0; I < P.coarse_extent.dims[0]; ++I) {
          os << "P " << I << ' ' << J;
          for (int s = 0; s < iw::kSlots; ++s) put(os, P.at(I, J, s));
          os << "\n";
        }
    }
  }
  os << "end\n";
}

MGHierarchy load_hierarchy(std::istream& is) {
  const auto fail = [](const std::string& what) -> MGHierarchy {
    throw std::runtime_error("load_hierarchy: malformed input (" + what + ")");
  };
  std::string tok;
  int version = 0;
  if (!(is >> tok >> version) || tok != "mgh" || version != 1)
    return fail("header");

  MGHierarchy h;
  std::string interp;
  if (!(is >> tok >> h.nu1) || tok != "nu1") return fail("nu1");
  if (!(is >> tok >> h.nu2) || tok != "nu2") return fail("nu2");
  if (!(is >> tok >> h.coarse_threshold) || tok != "threshold")
    return fail("threshold");
  if (!(is >> tok >> interp) || tok != "interp") return fail("interp");
  h.interp_mode =
      interp == "bilinear" ? InterpMode::Bilinear : InterpMode::OperatorInduced;

  int nlevels = 0;
  if (!(is >> tok >> nlevels) || tok != "levels" || nlevels < 1)
    return fail("levels");

  for (int l = 0; l < nlevels; ++l) {
    int lidx = 0, pattern = 0;
    std::int64_t nx = 0, ny = 0;
    if (!(is >> tok >> lidx) || tok != "level" || lidx != l) return fail("level");
    if (!(is >> tok >> nx >> ny) || tok != "grid") return fail("grid");
    if (!(is >> tok >> pattern) || tok != "pattern") return fail("pattern");

    GlobalGrid g(Dims::of(nx, ny));
    LocalExtent ext;
    ext.dims = g.dims;
    ext.offset = Dims::of(0, 0);
    StencilField A = StencilField::zeros(pattern == 5 ? StencilPattern::FivePoint
                                                      : StencilPattern::NinePoint,
                                         ext);
    for (std::int64_t n = 0; n < g.points(); ++n) {
      std::int64_t i = 0, j = 0;
      if (!(is >> tok >> i >> j) || tok != "A") return fail("A row");
      double* s = A.row(i, j);
      for (int e = 0; e < sten::kEntries; ++e)
        if (!(is >> s[e])) return fail("A value");
    }
    InterpField P;
    if (l >= 1) {
      const GlobalGrid cg = h.levels[static_cast<std::size_t>(l - 1)].grid;
      LocalExtent cext;
      cext.dims = cg.dims;
      cext.offset = Dims::of(0, 0);
      P = InterpField::zeros(cext);
      for (std::int64_t n = 0; n < cg.points(); ++n) {
        std::int64_t I = 0, J = 0;
        if (!(is >> tok >> I >> J) || tok != "P") return fail("P row");
        for (int s = 0; s < iw::kSlots; ++s)
          if (!(is >> P.at(I, J, s))) return fail("P value");
      }
    }
    h.levels.push_back(MGLevel{g, std::move(A), std::move(P)});
  }
  if (!(is >> tok) || tok != "end") return fail("trailer");

  const auto& A0 = h.levels.front().A;
  h.coarse_solver =
      DenseCholesky::factor(assemble_dense(A0), A0.extent.points());
  return h;
}

}  // namespace mgredist
