#include "mgredist/sim.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mgredist/detail/stencil_ops.hpp"

namespace mgredist {

namespace {

int ceil_log2(std::int64_t n) {
  return n <= 1 ? 0 : std::bit_width(static_cast<std::uint64_t>(n - 1));
}

}  // namespace

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Exchange: return "exchange";
    case EventKind::Gather: return "gather";
    case EventKind::Allgather: return "allgather";
    case EventKind::Scatter: return "scatter";
  }
  return "?";
}

void EventLog::add(int level, EventKind kind, std::int64_t messages,
                   std::int64_t bytes) {
  if (messages <= 0 && bytes <= 0) return;
  events.push_back(Event{level, kind, messages, bytes});
}

std::vector<LevelCounts> EventLog::per_level(int num_levels) const {
  std::vector<LevelCounts> out(static_cast<std::size_t>(num_levels));
  for (const Event& e : events) {
    LevelCounts& c = out.at(static_cast<std::size_t>(e.level));
    switch (e.kind) {
      case EventKind::Exchange:
        c.exchange_messages += e.messages;
        c.exchange_bytes += e.bytes;
        break;
      case EventKind::Gather:
        c.gather_messages += e.messages;
        c.gather_bytes += e.bytes;
        break;
      case EventKind::Allgather:
        c.allgather_messages += e.messages;
        c.allgather_bytes += e.bytes;
        break;
      case EventKind::Scatter:
        c.scatter_messages += e.messages;
        c.scatter_bytes += e.bytes;
        break;
    }
  }
  return out;
}

void EventLog::write_csv(std::ostream& os, int num_levels) const {
  const auto counts = per_level(num_levels);
  os << "level,kind,messages,bytes\n";
  for (int l = 0; l < num_levels; ++l) {
    const LevelCounts& c = counts[static_cast<std::size_t>(l)];
    const auto row = [&](const char* kind, std::int64_t m, std::int64_t b) {
      if (m == 0 && b == 0) return;
      os << l << ',' << kind << ',' << m << ',' << b << '\n';
    };
    row("exchange", c.exchange_messages, c.exchange_bytes);
    row("gather", c.gather_messages, c.gather_bytes);
    row("allgather", c.allgather_messages, c.allgather_bytes);
    row("scatter", c.scatter_messages, c.scatter_bytes);
  }
}

std::int64_t EventLog::total_messages() const {
  std::int64_t t = 0;
  for (const Event& e : events) t += e.messages;
  return t;
}

std::int64_t EventLog::total_bytes() const {
  std::int64_t t = 0;
  for (const Event& e : events) t += e.bytes;
  return t;
}

// ---------------------------------------------------------------------------
// Patch accessors for the shared kernels
// ---------------------------------------------------------------------------

namespace {

struct PatchRead {
  const double* d;
  std::int64_t ox, oy, stride;
  double operator()(std::int64_t i, std::int64_t j) const {
    return d[static_cast<std::size_t>((j - oy + 1) * stride + (i - ox + 1))];
  }
};

struct PatchWrite {
  double* d;
  std::int64_t ox, oy, stride;
  void operator()(std::int64_t i, std::int64_t j, double v) const {
    d[static_cast<std::size_t>((j - oy + 1) * stride + (i - ox + 1))] = v;
  }
};

/// Read-only view of a finished coarse level through ownership lookup; the
/// physical transport of these operands is accounted by the scatter and the
/// level's modeled exchanges.
struct CoarseView {
  const std::vector<int>* own_x;
  const std::vector<int>* own_y;
  const void* patches;  // std::vector<Patch> erased to keep the header light
  std::int64_t ncx, ncy, pgx;
  double (*read)(const void*, std::int64_t flat, std::int64_t I, std::int64_t J);

  double operator()(std::int64_t I, std::int64_t J) const {
    if (I < 0 || I >= ncx || J < 0 || J >= ncy) return 0.0;
    const std::int64_t flat =
        static_cast<std::int64_t>((*own_y)[static_cast<std::size_t>(J)]) * pgx +
        (*own_x)[static_cast<std::size_t>(I)];
    return read(patches, flat, I, J);
  }
};

std::vector<int> owner_array(const std::vector<std::int64_t>& cuts) {
  std::vector<int> own(static_cast<std::size_t>(cuts.back()), 0);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    for (std::int64_t c = cuts[k]; c < cuts[k + 1]; ++c)
      own[static_cast<std::size_t>(c)] = static_cast<int>(k);
  return own;
}

}  // namespace

void DistributedSolver::Patch::allocate(const LocalExtent& e) {
  ext = e;
  stride = e.dims[0] + 2;
  const std::size_t n =
      static_cast<std::size_t>(stride) * static_cast<std::size_t>(e.dims[1] + 2);
  x.assign(n, 0.0);
  b.assign(n, 0.0);
  r.assign(n, 0.0);
}

// ---------------------------------------------------------------------------
// Construction and data placement
// ---------------------------------------------------------------------------

DistributedSolver::DistributedSolver(const MGHierarchy& h,
                                     const RedistPath& plan,
                                     const SimOptions& opt)
    : h_(h), opt_(opt) {
  layouts_ = plan_layouts(h.fine_grid(), plan.takeovers(), h.coarse_threshold);
  if (static_cast<int>(layouts_.size()) != h.num_levels())
    throw std::invalid_argument(
        "DistributedSolver: plan level count does not match the hierarchy");
  for (int l = 0; l < h.num_levels(); ++l)
    if (!(layouts_[static_cast<std::size_t>(l)].grid ==
          h.levels[static_cast<std::size_t>(l)].grid))
      throw std::invalid_argument(
          "DistributedSolver: plan grids do not match the hierarchy");

  const int L = num_levels();
  levels_.resize(static_cast<std::size_t>(L));
  order_.resize(static_cast<std::size_t>(L));
  piece_order_.resize(static_cast<std::size_t>(L));

  std::mt19937_64 rng(opt.shuffle_seed);
  for (int l = 0; l < L; ++l) {
    const LevelLayout& lay = layouts_[static_cast<std::size_t>(l)];
    Level& lev = levels_[static_cast<std::size_t>(l)];
    const std::int64_t px = lay.procs.dims[0], py = lay.procs.dims[1];
    lev.ranks.resize(static_cast<std::size_t>(px * py));
    for (std::int64_t cj = 0; cj < py; ++cj)
      for (std::int64_t ci = 0; ci < px; ++ci) {
        LocalExtent e;
        e.dims = Dims::of(lay.cuts_x[static_cast<std::size_t>(ci + 1)] -
                              lay.cuts_x[static_cast<std::size_t>(ci)],
                          lay.cuts_y[static_cast<std::size_t>(cj + 1)] -
                              lay.cuts_y[static_cast<std::size_t>(cj)]);
        e.offset = Dims::of(lay.cuts_x[static_cast<std::size_t>(ci)],
                            lay.cuts_y[static_cast<std::size_t>(cj)]);
        lev.ranks[static_cast<std::size_t>(cj * px + ci)].allocate(e);
      }
    if (lay.redistributed) {
      const std::int64_t dx = lay.procs_above.dims[0];
      const std::int64_t dy = lay.procs_above.dims[1];
      lev.pieces.resize(static_cast<std::size_t>(dx * dy));
      for (std::int64_t cj = 0; cj < dy; ++cj)
        for (std::int64_t ci = 0; ci < dx; ++ci) {
          LocalExtent e;
          e.dims = Dims::of(lay.donor_cuts_x[static_cast<std::size_t>(ci + 1)] -
                                lay.donor_cuts_x[static_cast<std::size_t>(ci)],
                            lay.donor_cuts_y[static_cast<std::size_t>(cj + 1)] -
                                lay.donor_cuts_y[static_cast<std::size_t>(cj)]);
          e.offset = Dims::of(lay.donor_cuts_x[static_cast<std::size_t>(ci)],
                              lay.donor_cuts_y[static_cast<std::size_t>(cj)]);
          lev.pieces[static_cast<std::size_t>(cj * dx + ci)].allocate(e);
        }
      lev.donor_own_x = owner_array(lay.donor_cuts_x);
      lev.donor_own_y = owner_array(lay.donor_cuts_y);
    }
    lev.own_x = owner_array(lay.cuts_x);
    lev.own_y = owner_array(lay.cuts_y);

    auto& ord = order_[static_cast<std::size_t>(l)];
    ord.resize(lev.ranks.size());
    std::iota(ord.begin(), ord.end(), 0);
    auto& pord = piece_order_[static_cast<std::size_t>(l)];
    pord.resize(lev.pieces.size());
    std::iota(pord.begin(), pord.end(), 0);
    if (opt.shuffle_rank_order) {
      std::shuffle(ord.begin(), ord.end(), rng);
      std::shuffle(pord.begin(), pord.end(), rng);
    }
  }
}

void DistributedSolver::set_problem(const GridFunction& x0,
                                    const GridFunction& b) {
  const int L = num_levels();
  const bool into_pieces = L == 1 && layouts_[0].redistributed;
  Level& fine = levels_[static_cast<std::size_t>(L - 1)];
  auto& patches = into_pieces ? fine.pieces : fine.ranks;
  for (Patch& p : patches) {
    for (std::int64_t gj = p.ext.offset[1] - 1;
         gj <= p.ext.offset[1] + p.ext.dims[1]; ++gj)
      for (std::int64_t gi = p.ext.offset[0] - 1;
           gi <= p.ext.offset[0] + p.ext.dims[0]; ++gi) {
        p.x[p.idx(gi, gj)] = x0.at(gi, gj);
        p.b[p.idx(gi, gj)] = b.at(gi, gj);
        p.r[p.idx(gi, gj)] = 0.0;
      }
  }
}

GridFunction DistributedSolver::assemble_x() const {
  const int L = num_levels();
  const bool from_pieces = L == 1 && layouts_[0].redistributed;
  const Level& fine = levels_[static_cast<std::size_t>(L - 1)];
  const auto& patches = from_pieces ? fine.pieces : fine.ranks;
  GridFunction out = GridFunction::zeros(layouts_.back().grid);
  for (const Patch& p : patches)
    for (std::int64_t gj = p.ext.offset[1];
         gj < p.ext.offset[1] + p.ext.dims[1]; ++gj)
      for (std::int64_t gi = p.ext.offset[0];
           gi < p.ext.offset[0] + p.ext.dims[0]; ++gi)
        out.ref(gi, gj) = p.x[p.idx(gi, gj)];
  return out;
}

double DistributedSolver::rank_value(int level, int rank_index, SimField f,
                                     std::int64_t gi, std::int64_t gj) const {
  const Patch& p = levels_[static_cast<std::size_t>(level)]
                       .ranks[static_cast<std::size_t>(rank_index)];
  return p.field(f)[p.idx(gi, gj)];
}

double DistributedSolver::piece_value(int level, int piece_index, SimField f,
                                      std::int64_t gi, std::int64_t gj) const {
  const Patch& p = levels_[static_cast<std::size_t>(level)]
                       .pieces[static_cast<std::size_t>(piece_index)];
  return p.field(f)[p.idx(gi, gj)];
}

LocalExtent DistributedSolver::piece_extent(int level, int piece_index) const {
  return levels_[static_cast<std::size_t>(level)]
      .pieces[static_cast<std::size_t>(piece_index)]
      .ext;
}

// ---------------------------------------------------------------------------
// Communication phases
// ---------------------------------------------------------------------------

void DistributedSolver::halo_exchange(int level, SimField f) {
  const LevelLayout& lay = layouts_[static_cast<std::size_t>(level)];
  Level& lev = levels_[static_cast<std::size_t>(level)];
  const std::int64_t px = lay.procs.dims[0];
  const auto& cx = lay.cuts_x;
  const auto& cy = lay.cuts_y;

  std::vector<std::int64_t> nzx, nzy;
  for (std::size_t k = 0; k + 1 < cx.size(); ++k)
    if (cx[k + 1] > cx[k]) nzx.push_back(static_cast<std::int64_t>(k));
  for (std::size_t k = 0; k + 1 < cy.size(); ++k)
    if (cy[k + 1] > cy[k]) nzy.push_back(static_cast<std::int64_t>(k));

  std::int64_t msgs = 0, bytes = 0;

  // x sweep: boundary columns between consecutive non-empty columns
  for (std::size_t a = 0; a + 1 < nzx.size(); ++a) {
    const std::int64_t kl = nzx[a], kr = nzx[a + 1];
    const std::int64_t lcol = cx[static_cast<std::size_t>(kl + 1)] - 1;
    const std::int64_t rcol = cx[static_cast<std::size_t>(kr)];
    for (const std::int64_t kj : nzy) {
      Patch& left = lev.ranks[static_cast<std::size_t>(kj * px + kl)];
      Patch& right = lev.ranks[static_cast<std::size_t>(kj * px + kr)];
      auto& lf = left.field(f);
      auto& rf = right.field(f);
      const std::int64_t j0 = cy[static_cast<std::size_t>(kj)];
      const std::int64_t j1 = cy[static_cast<std::size_t>(kj + 1)];
      for (std::int64_t j = j0; j < j1; ++j) {
        rf[right.idx(lcol, j)] = lf[left.idx(lcol, j)];
        lf[left.idx(rcol, j)] = rf[right.idx(rcol, j)];
      }
      msgs += 2;
      bytes += 2 * (j1 - j0) * 8;
    }
  }

  // y sweep: boundary rows, carrying the x-halo corners along
  for (std::size_t a = 0; a + 1 < nzy.size(); ++a) {
    const std::int64_t kb = nzy[a], kt = nzy[a + 1];
    const std::int64_t brow = cy[static_cast<std::size_t>(kb + 1)] - 1;
    const std::int64_t trow = cy[static_cast<std::size_t>(kt)];
    for (const std::int64_t ki : nzx) {
      Patch& bot = lev.ranks[static_cast<std::size_t>(kb * px + ki)];
      Patch& top = lev.ranks[static_cast<std::size_t>(kt * px + ki)];
      auto& bf = bot.field(f);
      auto& tf = top.field(f);
      const std::int64_t i0 = cx[static_cast<std::size_t>(ki)] - 1;
      const std::int64_t i1 = cx[static_cast<std::size_t>(ki + 1)] + 1;
      for (std::int64_t i = i0; i < i1; ++i) {
        tf[top.idx(i, brow)] = bf[bot.idx(i, brow)];
        bf[bot.idx(i, trow)] = tf[top.idx(i, trow)];
      }
      msgs += 2;
      bytes += 2 * (cx[static_cast<std::size_t>(ki + 1)] -
                    cx[static_cast<std::size_t>(ki)]) *
               8;  // corner padding rides along uncounted
    }
  }

  log_.add(level, EventKind::Exchange, msgs, bytes);
  if (opt_.inject_extra_exchange_level == level)
    log_.add(level, EventKind::Exchange, msgs, bytes);
}

void DistributedSolver::gather_rhs(int level) {
  const LevelLayout& lay = layouts_[static_cast<std::size_t>(level)];
  Level& lev = levels_[static_cast<std::size_t>(level)];
  const std::int64_t pfx = lay.procs_above.dims[0];
  const std::int64_t pfy = lay.procs_above.dims[1];
  const std::int64_t pcx = lay.procs.dims[0], pcy = lay.procs.dims[1];
  const std::int64_t rx = ceil_div(pfx, pcx), ry = ceil_div(pfy, pcy);

  for (std::int64_t cj = 0; cj < pcy; ++cj)
    for (std::int64_t ci = 0; ci < pcx; ++ci) {
      Patch& tgt = lev.ranks[static_cast<std::size_t>(cj * pcx + ci)];
      const std::int64_t dx0 = std::min(ci * rx, pfx);
      const std::int64_t dx1 = std::min((ci + 1) * rx, pfx);
      const std::int64_t dy0 = std::min(cj * ry, pfy);
      const std::int64_t dy1 = std::min((cj + 1) * ry, pfy);
      for (std::int64_t dy = dy0; dy < dy1; ++dy)
        for (std::int64_t dx = dx0; dx < dx1; ++dx) {
          const Patch& piece =
              lev.pieces[static_cast<std::size_t>(dy * pfx + dx)];
          for (std::int64_t gj = piece.ext.offset[1];
               gj < piece.ext.offset[1] + piece.ext.dims[1]; ++gj)
            for (std::int64_t gi = piece.ext.offset[0];
                 gi < piece.ext.offset[0] + piece.ext.dims[0]; ++gi)
              tgt.b[tgt.idx(gi, gj)] = piece.b[piece.idx(gi, gj)];
        }
      const std::int64_t members = (dx1 - dx0) * (dy1 - dy0);
      if (members <= 1) continue;
      const std::int64_t union_points = tgt.ext.points();
      const std::int64_t root_points =
          lev.pieces[static_cast<std::size_t>(dy0 * pfx + dx0)].ext.points();
      if (opt_.mode == RedistMode::Redundant)
        log_.add(level, EventKind::Allgather, ceil_log2(members),
                 (members - 1) * union_points * 8);
      else
        log_.add(level, EventKind::Gather, ceil_log2(members),
                 (union_points - root_points) * 8);
    }
}

void DistributedSolver::scatter_sol(int level) {
  const LevelLayout& lay = layouts_[static_cast<std::size_t>(level)];
  Level& lev = levels_[static_cast<std::size_t>(level)];
  const std::int64_t pfx = lay.procs_above.dims[0];
  const std::int64_t pfy = lay.procs_above.dims[1];
  const std::int64_t pcx = lay.procs.dims[0], pcy = lay.procs.dims[1];
  const std::int64_t rx = ceil_div(pfx, pcx), ry = ceil_div(pfy, pcy);

  for (std::int64_t cj = 0; cj < pcy; ++cj)
    for (std::int64_t ci = 0; ci < pcx; ++ci) {
      const Patch& src = lev.ranks[static_cast<std::size_t>(cj * pcx + ci)];
      const std::int64_t dx0 = std::min(ci * rx, pfx);
      const std::int64_t dx1 = std::min((ci + 1) * rx, pfx);
      const std::int64_t dy0 = std::min(cj * ry, pfy);
      const std::int64_t dy1 = std::min((cj + 1) * ry, pfy);
      for (std::int64_t dy = dy0; dy < dy1; ++dy)
        for (std::int64_t dx = dx0; dx < dx1; ++dx) {
          Patch& piece = lev.pieces[static_cast<std::size_t>(dy * pfx + dx)];
          for (std::int64_t gj = piece.ext.offset[1];
               gj < piece.ext.offset[1] + piece.ext.dims[1]; ++gj)
            for (std::int64_t gi = piece.ext.offset[0];
                 gi < piece.ext.offset[0] + piece.ext.dims[0]; ++gi)
              piece.x[piece.idx(gi, gj)] = src.x[src.idx(gi, gj)];
        }
      const std::int64_t members = (dx1 - dx0) * (dy1 - dy0);
      if (members <= 1 || opt_.mode == RedistMode::Redundant) continue;
      const std::int64_t union_points = src.ext.points();
      const std::int64_t root_points =
          lev.pieces[static_cast<std::size_t>(dy0 * pfx + dx0)].ext.points();
      log_.add(level, EventKind::Scatter, ceil_log2(members),
               (union_points - root_points) * 8);
    }
}

// ---------------------------------------------------------------------------
// Compute phases
// ---------------------------------------------------------------------------

void DistributedSolver::relax_level(int level, int sweeps) {
  const StencilField& A = h_.levels[static_cast<std::size_t>(level)].A;
  Level& lev = levels_[static_cast<std::size_t>(level)];
  const int nc = A.colors();
  for (int sweep = 0; sweep < sweeps; ++sweep)
    for (int color = 0; color < nc; ++color) {
      for (const int k : order_[static_cast<std::size_t>(level)]) {
        Patch& p = lev.ranks[static_cast<std::size_t>(k)];
        if (p.ext.empty()) continue;
        kernels::relax_color(
            A, PatchRead{p.x.data(), p.ext.offset[0], p.ext.offset[1], p.stride},
            PatchWrite{p.x.data(), p.ext.offset[0], p.ext.offset[1], p.stride},
            PatchRead{p.b.data(), p.ext.offset[0], p.ext.offset[1], p.stride},
            p.ext.offset[0], p.ext.offset[0] + p.ext.dims[0], p.ext.offset[1],
            p.ext.offset[1] + p.ext.dims[1], color, nc);
      }
      halo_exchange(level, SimField::X);
    }
}

void DistributedSolver::residual_level(int level) {
  const StencilField& A = h_.levels[static_cast<std::size_t>(level)].A;
  Level& lev = levels_[static_cast<std::size_t>(level)];
  for (const int k : order_[static_cast<std::size_t>(level)]) {
    Patch& p = lev.ranks[static_cast<std::size_t>(k)];
    if (p.ext.empty()) continue;
    kernels::residual_rect(
        A, PatchRead{p.x.data(), p.ext.offset[0], p.ext.offset[1], p.stride},
        PatchRead{p.b.data(), p.ext.offset[0], p.ext.offset[1], p.stride},
        PatchWrite{p.r.data(), p.ext.offset[0], p.ext.offset[1], p.stride},
        p.ext.offset[0], p.ext.offset[0] + p.ext.dims[0], p.ext.offset[1],
        p.ext.offset[1] + p.ext.dims[1]);
  }
  halo_exchange(level, SimField::R);
}

void DistributedSolver::restrict_level(int level) {
  const LevelLayout& below = layouts_[static_cast<std::size_t>(level - 1)];
  const InterpField& P = h_.levels[static_cast<std::size_t>(level)].P;
  Level& lev = levels_[static_cast<std::size_t>(level)];
  Level& blev = levels_[static_cast<std::size_t>(level - 1)];
  for (const int k : order_[static_cast<std::size_t>(level)]) {
    Patch& src = lev.ranks[static_cast<std::size_t>(k)];
    Patch& tgt = below.redistributed ? blev.pieces[static_cast<std::size_t>(k)]
                                     : blev.ranks[static_cast<std::size_t>(k)];
    if (tgt.ext.empty()) continue;
    kernels::restrict_rect(
        P,
        PatchRead{src.r.data(), src.ext.offset[0], src.ext.offset[1],
                  src.stride},
        PatchWrite{tgt.b.data(), tgt.ext.offset[0], tgt.ext.offset[1],
                   tgt.stride},
        tgt.ext.offset[0], tgt.ext.offset[0] + tgt.ext.dims[0],
        tgt.ext.offset[1], tgt.ext.offset[1] + tgt.ext.dims[1]);
  }
}

void DistributedSolver::interp_level(int level) {
  const LevelLayout& below = layouts_[static_cast<std::size_t>(level - 1)];
  const StencilField& A = h_.levels[static_cast<std::size_t>(level)].A;
  const InterpField& P = h_.levels[static_cast<std::size_t>(level)].P;
  Level& lev = levels_[static_cast<std::size_t>(level)];
  Level& blev = levels_[static_cast<std::size_t>(level - 1)];

  const auto& patches = below.redistributed ? blev.pieces : blev.ranks;
  const std::vector<int>& ox =
      below.redistributed ? blev.donor_own_x : blev.own_x;
  const std::vector<int>& oy =
      below.redistributed ? blev.donor_own_y : blev.own_y;
  const std::int64_t pgx = below.redistributed ? below.procs_above.dims[0]
                                               : below.procs.dims[0];

  CoarseView xc{
      &ox, &oy, &patches, below.grid.dims[0], below.grid.dims[1], pgx,
      [](const void* ps, std::int64_t flat, std::int64_t I, std::int64_t J) {
        const auto& vec = *static_cast<const std::vector<Patch>*>(ps);
        const Patch& p = vec[static_cast<std::size_t>(flat)];
        return p.x[p.idx(I, J)];
      }};

  for (const int k : order_[static_cast<std::size_t>(level)]) {
    Patch& p = lev.ranks[static_cast<std::size_t>(k)];
    if (p.ext.empty()) continue;
    kernels::interp_correct_rect(
        P, A, xc,
        PatchRead{p.r.data(), p.ext.offset[0], p.ext.offset[1], p.stride},
        PatchRead{p.x.data(), p.ext.offset[0], p.ext.offset[1], p.stride},
        PatchWrite{p.x.data(), p.ext.offset[0], p.ext.offset[1], p.stride},
        p.ext.offset[0], p.ext.offset[0] + p.ext.dims[0], p.ext.offset[1],
        p.ext.offset[1] + p.ext.dims[1]);
  }
  halo_exchange(level, SimField::X);
}

void DistributedSolver::coarse_solve() {
  Level& lev = levels_[0];
  Patch& task = lev.ranks[0];
  const std::int64_t nx = task.ext.dims[0], ny = task.ext.dims[1];
  std::vector<double> rhs(static_cast<std::size_t>(nx * ny));
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i)
      rhs[static_cast<std::size_t>(j * nx + i)] = task.b[task.idx(i, j)];
  const std::vector<double> sol = h_.coarse_solver.solve(std::move(rhs));
  for (std::int64_t j = 0; j < ny; ++j)
    for (std::int64_t i = 0; i < nx; ++i)
      task.x[task.idx(i, j)] = sol[static_cast<std::size_t>(j * nx + i)];
}

void DistributedSolver::zero_x(int level) {
  Level& lev = levels_[static_cast<std::size_t>(level)];
  for (Patch& p : lev.ranks) std::fill(p.x.begin(), p.x.end(), 0.0);
  for (Patch& p : lev.pieces) std::fill(p.x.begin(), p.x.end(), 0.0);
}

void DistributedSolver::cycle() {
  const int L = num_levels();
  if (L == 1) {
    if (layouts_[0].redistributed) gather_rhs(0);
    coarse_solve();
    if (layouts_[0].redistributed) scatter_sol(0);
    return;
  }
  for (int l = L - 1; l >= 1; --l) {
    relax_level(l, h_.nu1);
    residual_level(l);
    if (l - 1 > 0) zero_x(l - 1);
    restrict_level(l);
    if (layouts_[static_cast<std::size_t>(l - 1)].redistributed) gather_rhs(l - 1);
  }
  coarse_solve();
  for (int l = 1; l <= L - 1; ++l) {
    if (layouts_[static_cast<std::size_t>(l - 1)].redistributed) scatter_sol(l - 1);
    interp_level(l);
    relax_level(l, h_.nu2);
  }
}

std::pair<GridFunction, EventLog> vcycle_redist(const MGHierarchy& h,
                                                const RedistPath& plan,
                                                const GridFunction& x0,
                                                const GridFunction& b,
                                                const SimOptions& opt) {
  DistributedSolver solver(h, plan, opt);
  solver.set_problem(x0, b);
  solver.cycle();
  return {solver.assemble_x(), solver.log()};
}

// ---------------------------------------------------------------------------
// Reconciliation
// ---------------------------------------------------------------------------

std::string ReconcileReport::summary() const {
  if (ok) return "reconciliation OK";
  std::ostringstream os;
  os << "reconciliation FAILED (" << mismatches.size() << " mismatches)";
  for (const auto& mm : mismatches)
    os << "\n  level " << mm.level << " " << mm.kind << " " << mm.field
       << ": expected " << mm.expected << ", logged " << mm.actual;
  return os.str();
}

ReconcileReport reconcile(const EventLog& log,
                          const std::vector<LevelLayout>& layouts, int nu1,
                          int nu2, RedistMode mode, int cycles) {
  const int L = static_cast<int>(layouts.size());
  const auto expected = implied_counts(layouts, nu1, nu2, mode, cycles);
  const auto actual = log.per_level(L);
  ReconcileReport rep;
  const auto check = [&](int level, const char* kind, const char* field,
                         std::int64_t exp, std::int64_t act) {
    if (exp == act) return;
    rep.ok = false;
    rep.mismatches.push_back(ReconcileMismatch{level, kind, field, exp, act});
  };
  for (int l = 0; l < L; ++l) {
    const LevelCounts& e = expected[static_cast<std::size_t>(l)];
    const LevelCounts& a = actual[static_cast<std::size_t>(l)];
    check(l, "exchange", "messages", e.exchange_messages, a.exchange_messages);
    check(l, "exchange", "bytes", e.exchange_bytes, a.exchange_bytes);
    check(l, "gather", "messages", e.gather_messages, a.gather_messages);
    check(l, "gather", "bytes", e.gather_bytes, a.gather_bytes);
    check(l, "allgather", "messages", e.allgather_messages,
          a.allgather_messages);
    check(l, "allgather", "bytes", e.allgather_bytes, a.allgather_bytes);
    check(l, "scatter", "messages", e.scatter_messages, a.scatter_messages);
    check(l, "scatter", "bytes", e.scatter_bytes, a.scatter_bytes);
  }
  return rep;
}

DistributedRun run_vcycles_distributed(const MGHierarchy& h,
                                       const RedistPath& plan,
                                       const GridFunction& x0,
                                       const GridFunction& b, int cycles,
                                       const SimOptions& opt) {
  DistributedSolver solver(h, plan, opt);
  solver.set_problem(x0, b);
  DistributedRun run;
  const StencilField& A = h.levels.back().A;
  GridFunction xa = solver.assemble_x();
  run.stats.residual_norms.push_back(residual(A, xa, b).l2_norm());
  for (int c = 0; c < cycles; ++c) {
    solver.cycle();
    xa = solver.assemble_x();
    run.stats.residual_norms.push_back(residual(A, xa, b).l2_norm());
    const double prev =
        run.stats.residual_norms[run.stats.residual_norms.size() - 2];
    run.stats.factors.push_back(
        prev > 0.0 ? run.stats.residual_norms.back() / prev : 0.0);
  }
  run.x = std::move(xa);
  run.log = solver.log();
  run.reconciliation =
      reconcile(run.log, solver.layouts(), h.nu1, h.nu2, opt.mode, cycles);
  return run;
}

}  // namespace mgredist
