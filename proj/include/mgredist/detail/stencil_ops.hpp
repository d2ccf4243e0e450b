#pragma once

#include <cstdint>

#include "mgredist/stencil.hpp"

/// @file stencil_ops.hpp
/// Pointwise kernel bodies shared by the serial solver and the logical-rank
/// simulator.  Both instantiate the same expressions over their own field
/// accessors, so a distributed sweep reproduces the serial sweep bit for bit.
///
/// Accessor contracts (all indices are global):
///   XRead  : double operator()(i, j)      -- reads one layer past the rect
///   XWrite : void   operator()(i, j, v)
///   Coeff  : const double* row(i, j), restricted to owned points

namespace mgredist::kernels {

using std::int64_t;

inline bool on_color(int64_t i, int64_t j, int color, int ncolors) {
  if (ncolors == 2) return ((i + j) & 1) == color;
  return ((i & 1) + 2 * (j & 1)) == color;
}

/// One Gauss-Seidel update pass restricted to `color` over
/// [i0,i1) x [j0,j1).  Same-color points are never stencil neighbors, so the
/// visit order within a call does not affect the result.
template <class Coeff, class XRead, class XWrite, class BRead>
void relax_color(const Coeff& A, const XRead& x, const XWrite& xw,
                 const BRead& b, int64_t i0, int64_t i1, int64_t j0, int64_t j1,
                 int color, int ncolors) {
  for (int64_t j = j0; j < j1; ++j)
    for (int64_t i = i0; i < i1; ++i) {
      if (!on_color(i, j, color, ncolors)) continue;
      const double* s = A.row(i, j);
      const double off = s[sten::W] * x(i - 1, j) + s[sten::E] * x(i + 1, j) +
                         s[sten::S] * x(i, j - 1) + s[sten::N] * x(i, j + 1) +
                         s[sten::SW] * x(i - 1, j - 1) +
                         s[sten::SE] * x(i + 1, j - 1) +
                         s[sten::NW] * x(i - 1, j + 1) +
                         s[sten::NE] * x(i + 1, j + 1);
      xw(i, j, (b(i, j) - off) / s[sten::C]);
    }
}

/// r = b - A x over [i0,i1) x [j0,j1).
template <class Coeff, class XRead, class BRead, class RWrite>
void residual_rect(const Coeff& A, const XRead& x, const BRead& b,
                   const RWrite& rw, int64_t i0, int64_t i1, int64_t j0,
                   int64_t j1) {
  for (int64_t j = j0; j < j1; ++j)
    for (int64_t i = i0; i < i1; ++i) {
      const double* s = A.row(i, j);
      const double ax = s[sten::C] * x(i, j) + s[sten::W] * x(i - 1, j) +
                        s[sten::E] * x(i + 1, j) + s[sten::S] * x(i, j - 1) +
                        s[sten::N] * x(i, j + 1) +
                        s[sten::SW] * x(i - 1, j - 1) +
                        s[sten::SE] * x(i + 1, j - 1) +
                        s[sten::NW] * x(i - 1, j + 1) +
                        s[sten::NE] * x(i + 1, j + 1);
      rw(i, j, b(i, j) - ax);
    }
}

/// b_c = P^T r over coarse points [I0,I1) x [J0,J1); weights plus injection.
template <class RRead, class BWrite>
void restrict_rect(const InterpField& P, const RRead& r, const BWrite& bw,
                   int64_t I0, int64_t I1, int64_t J0, int64_t J1) {
  for (int64_t J = J0; J < J1; ++J)
    for (int64_t I = I0; I < I1; ++I) {
      const int64_t i = 2 * I, j = 2 * J;
      const double* w = P.weights.data() + P.index(I, J);
      const double v = r(i, j) + w[iw::NW] * r(i - 1, j + 1) +
                       w[iw::N] * r(i, j + 1) + w[iw::NE] * r(i + 1, j + 1) +
                       w[iw::W] * r(i - 1, j) + w[iw::E] * r(i + 1, j) +
                       w[iw::SW] * r(i - 1, j - 1) + w[iw::S] * r(i, j - 1) +
                       w[iw::SE] * r(i + 1, j - 1);
      bw(I, J, v);
    }
}

/// x += P x_c with injection at coarse images and the residual correction
/// r/C folded into the edge and cell-center updates.
template <class Coeff, class XcRead, class RRead, class XRead, class XWrite>
void interp_correct_rect(const InterpField& P, const Coeff& A,
                         const XcRead& xc, const RRead& r, const XRead& x,
                         const XWrite& xw, int64_t i0, int64_t i1, int64_t j0,
                         int64_t j1) {
  for (int64_t j = j0; j < j1; ++j)
    for (int64_t i = i0; i < i1; ++i) {
      const bool iodd = (i & 1) != 0, jodd = (j & 1) != 0;
      double upd;
      if (!iodd && !jodd) {
        upd = xc(i / 2, j / 2);
      } else if (iodd && !jodd) {
        const int64_t I = (i - 1) / 2, J = j / 2;
        upd = P.at_or_zero(I, J, iw::E) * xc(I, J) +
              P.at_or_zero(I + 1, J, iw::W) * xc(I + 1, J) +
              r(i, j) / A.row(i, j)[sten::C];
      } else if (!iodd && jodd) {
        const int64_t I = i / 2, J = (j - 1) / 2;
        upd = P.at_or_zero(I, J, iw::N) * xc(I, J) +
              P.at_or_zero(I, J + 1, iw::S) * xc(I, J + 1) +
              r(i, j) / A.row(i, j)[sten::C];
      } else {
        const int64_t I = (i - 1) / 2, J = (j - 1) / 2;
        upd = P.at_or_zero(I, J, iw::NE) * xc(I, J) +
              P.at_or_zero(I + 1, J, iw::NW) * xc(I + 1, J) +
              P.at_or_zero(I, J + 1, iw::SE) * xc(I, J + 1) +
              P.at_or_zero(I + 1, J + 1, iw::SW) * xc(I + 1, J + 1) +
              r(i, j) / A.row(i, j)[sten::C];
      }
      xw(i, j, x(i, j) + upd);
    }
}

}  // namespace mgredist::kernels
