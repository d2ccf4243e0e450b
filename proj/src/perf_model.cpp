#include "mgredist/perf_model.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mgredist {

namespace {

int ceil_log2(std::int64_t n) {
  return n <= 1 ? 0
               : std::bit_width(static_cast<std::uint64_t>(n - 1));
}

std::int64_t nonzero_widths(const std::vector<std::int64_t>& cuts) {
  std::int64_t m = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    if (cuts[k + 1] > cuts[k]) ++m;
  return m;
}

}  // namespace

MachineParams MachineParams::parse(std::istream& is) {
  MachineParams m;
  bool got_a = false, got_b = false, got_g = false;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (auto& c : line)
      if (c == '=') c = ' ';
    std::istringstream ls(line);
    std::string key;
    double value = 0.0;
    if (!(ls >> key >> value)) continue;
    if (key == "alpha_s") {
      m.alpha = value;
      got_a = true;
    } else if (key == "beta_s_per_byte") {
      m.beta = value;
      got_b = true;
    } else if (key == "gamma_s_per_flop") {
      m.gamma = value;
      got_g = true;
    } else {
      throw std::runtime_error("machine file: unknown key '" + key + "'");
    }
  }
  if (!got_a || !got_b || !got_g)
    throw std::runtime_error(
        "machine file: need alpha_s, beta_s_per_byte and gamma_s_per_flop");
  if (m.alpha < 0 || m.beta < 0 || m.gamma < 0)
    throw std::runtime_error("machine file: parameters must be non-negative");
  return m;
}

MachineParams MachineParams::from_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("machine file: cannot open " + path);
  return parse(f);
}

// ---------------------------------------------------------------------------
// Per-phase formulas
// ---------------------------------------------------------------------------

double t_exchange(const LevelShape& s, const MachineParams& m, int D) {
  if (D != 2 && D != 3)
    throw std::invalid_argument("t_exchange: D must be 2 or 3");
  std::int64_t sum = 0;
  for (int d = 0; d < D; ++d) sum += s.local_dims[d];
  return 2.0 * static_cast<double>(D) * m.alpha +
         2.0 * static_cast<double>(sum) * 8.0 * m.beta;
}

double t_smooth(const LevelShape& s, const MachineParams& m) {
  const int D = s.local_dims.ndim;
  const double points = static_cast<double>(s.local_dims.product());
  const double sweeps = static_cast<double>(s.nu1 + s.nu2);
  return 2.0 * static_cast<double>(s.stencil_points) * points * sweeps *
             m.gamma +
         static_cast<double>(s.colors) * sweeps * t_exchange(s, m, D);
}

double t_residual(const LevelShape& s, const MachineParams& m) {
  const int D = s.local_dims.ndim;
  const double points = static_cast<double>(s.local_dims.product());
  return 2.0 * static_cast<double>(s.stencil_points) * points * m.gamma +
         t_exchange(s, m, D);
}

double t_restrict(const LevelShape& s, const MachineParams& m) {
  const double points = static_cast<double>(s.local_dims.product());
  return 2.0 * static_cast<double>(s.stencil_points) * points * m.gamma;
}

double t_interp(const LevelShape& fine, const Dims& coarse_local,
                const MachineParams& m, int D) {
  const double pf = static_cast<double>(fine.local_dims.product());
  const double pc = static_cast<double>(coarse_local.product());
  double flops;
  if (D == 2) {
    flops = pf + 20.0 * pc + 6.0 * static_cast<double>(coarse_local.sum());
  } else if (D == 3) {
    flops = pf + 60.0 * pc +
            15.0 * static_cast<double>(coarse_local[0]) *
                static_cast<double>(coarse_local[2]) +
            6.0 * static_cast<double>(coarse_local[1]) *
                static_cast<double>(coarse_local[2]) +
            static_cast<double>(coarse_local[2]);
  } else {
    throw std::invalid_argument("t_interp: D must be 2 or 3");
  }
  return flops * m.gamma + t_exchange(fine, m, D);
}

double t_gather(const ProcBlock& block, const MachineParams& m) {
  const double p = static_cast<double>(block.block_size);
  return static_cast<double>(ceil_log2(block.block_size)) * m.alpha +
         static_cast<double>(block.local_points) * ((p - 1.0) / p) * 8.0 *
             m.beta;
}

double t_agglomerate(const std::optional<ProcBlock>& block, RedistMode mode,
                     const MachineParams& m) {
  if (!block) return 0.0;
  const double gather = t_gather(*block, m);
  const double scatter = mode == RedistMode::NonRedundant ? gather : 0.0;
  return gather + scatter;
}

double t_cgsolve(const GlobalGrid& coarse, const ProcBlock& block,
                 const MachineParams& m, RedistMode mode) {
  const double n = static_cast<double>(coarse.points());
  return t_agglomerate(block, mode, m) + n * n * m.gamma;
}

// ---------------------------------------------------------------------------
// Plan layouts
// ---------------------------------------------------------------------------

std::vector<LevelLayout> plan_layouts(const GlobalGrid& fine,
                                      const std::vector<Takeover>& takeovers,
                                      int coarse_threshold) {
  const std::vector<GlobalGrid> grids = coarsening_levels(fine, coarse_threshold);
  const int L = static_cast<int>(grids.size());
  if (takeovers.empty())
    throw std::invalid_argument("plan_layouts: need at least the fine takeover");
  if (takeovers.front().level != L - 1)
    throw std::invalid_argument("plan_layouts: first takeover must be the fine level");
  for (std::size_t k = 0; k + 1 < takeovers.size(); ++k) {
    if (takeovers[k + 1].level >= takeovers[k].level ||
        takeovers[k + 1].level < 1)
      throw std::invalid_argument("plan_layouts: takeover levels must strictly decrease");
    if (!takeovers[k + 1].proc.dims.all_le(takeovers[k].proc.dims) ||
        takeovers[k + 1].proc.total() >= takeovers[k].proc.total())
      throw std::invalid_argument(
          "plan_layouts: each takeover must shrink the processor grid");
  }

  std::vector<LevelLayout> layouts(static_cast<std::size_t>(L));
  const ProcessorGrid one(Dims::of(1, 1));

  std::size_t next_tk = 1;  // takeovers consumed while walking down
  for (int l = L - 1; l >= 0; --l) {
    LevelLayout& lay = layouts[static_cast<std::size_t>(l)];
    lay.grid = grids[static_cast<std::size_t>(l)];

    const ProcessorGrid prev_proc =
        l == L - 1 ? takeovers.front().proc
                   : layouts[static_cast<std::size_t>(l + 1)].procs;
    ProcessorGrid proc = prev_proc;
    if (next_tk < takeovers.size() && takeovers[next_tk].level == l) {
      proc = takeovers[next_tk].proc;
      ++next_tk;
    }

    if (l == L - 1) {
      lay.procs = proc;
      lay.cuts_x = partition_cuts(lay.grid.dims[0], proc.dims[0]);
      lay.cuts_y = partition_cuts(lay.grid.dims[1], proc.dims[1]);
      continue;
    }
    if (l == 0 && proc.total() > 1) proc = one;  // direct solve runs on one task

    const LevelLayout& above = layouts[static_cast<std::size_t>(l + 1)];
    const std::vector<std::int64_t> ind_x = coarsen_cuts(above.cuts_x);
    const std::vector<std::int64_t> ind_y = coarsen_cuts(above.cuts_y);
    lay.procs = proc;
    if (proc == above.procs) {
      lay.cuts_x = ind_x;
      lay.cuts_y = ind_y;
    } else {
      lay.redistributed = true;
      lay.procs_above = above.procs;
      lay.donor_cuts_x = ind_x;
      lay.donor_cuts_y = ind_y;
      const auto block_cuts = [](const std::vector<std::int64_t>& ind,
                                 std::int64_t p_fine, std::int64_t p_coarse) {
        const std::int64_t r = ceil_div(p_fine, p_coarse);
        std::vector<std::int64_t> cuts(static_cast<std::size_t>(p_coarse) + 1);
        for (std::int64_t k = 0; k <= p_coarse; ++k)
          cuts[static_cast<std::size_t>(k)] =
              ind[static_cast<std::size_t>(std::min(k * r, p_fine))];
        return cuts;
      };
      lay.cuts_x = block_cuts(ind_x, above.procs.dims[0], proc.dims[0]);
      lay.cuts_y = block_cuts(ind_y, above.procs.dims[1], proc.dims[1]);
    }
  }
  if (next_tk != takeovers.size())
    throw std::invalid_argument("plan_layouts: unused takeover entries");

  // a single-level problem still gathers onto the solve task
  if (L == 1 && layouts[0].procs.total() > 1) {
    LevelLayout& lay = layouts[0];
    lay.redistributed = true;
    lay.procs_above = lay.procs;
    lay.donor_cuts_x = lay.cuts_x;
    lay.donor_cuts_y = lay.cuts_y;
    lay.procs = one;
    lay.cuts_x = {0, lay.grid.dims[0]};
    lay.cuts_y = {0, lay.grid.dims[1]};
  }
  return layouts;
}

LevelShape shape_of(const std::vector<LevelLayout>& layouts, int level, int nu1,
                    int nu2) {
  const LevelLayout& lay = layouts[static_cast<std::size_t>(level)];
  LevelShape s;
  s.global_dims = lay.grid.dims;
  s.proc_dims = lay.procs.dims;
  s.local_dims = agglomerated_local(lay.grid, lay.procs);
  const bool finest = level + 1 == static_cast<int>(layouts.size());
  s.stencil_points = finest ? 5 : 9;
  s.colors = finest ? 2 : 4;
  s.nu1 = nu1;
  s.nu2 = nu2;
  return s;
}

CostBreakdown t_vcycle(const std::vector<LevelLayout>& layouts, int nu1, int nu2,
                       RedistMode mode, const MachineParams& m) {
  const int L = static_cast<int>(layouts.size());
  CostBreakdown cb;
  for (int l = L - 1; l >= 1; --l) {
    const LevelShape sh = shape_of(layouts, l, nu1, nu2);
    const int D = sh.local_dims.ndim;
    cb.smooth += t_smooth(sh, m);
    cb.residual += t_residual(sh, m);
    cb.restriction += t_restrict(sh, m);
    const LevelLayout& below = layouts[static_cast<std::size_t>(l - 1)];
    const Dims coarse_local =
        agglomerated_local(below.grid, layouts[static_cast<std::size_t>(l)].procs);
    cb.interp += t_interp(sh, coarse_local, m, D);
    if (below.redistributed && l - 1 >= 1) {
      const ProcBlock block = agglomerate_blocks(below.procs_above, below.procs,
                                                 below.grid);
      cb.agglomerate += t_agglomerate(block, mode, m);
    }
  }
  const LevelLayout& bottom = layouts.front();
  ProcBlock block0;
  if (bottom.redistributed) {
    block0 = agglomerate_blocks(bottom.procs_above, bottom.procs, bottom.grid);
  } else {
    block0 = agglomerate_blocks(bottom.procs, bottom.procs, bottom.grid);
  }
  cb.cgsolve = t_cgsolve(bottom.grid, block0, m, mode);
  cb.total = cb.smooth + cb.residual + cb.restriction + cb.interp +
             cb.agglomerate + cb.cgsolve;
  const auto counts = implied_counts(layouts, nu1, nu2, mode, 1);
  for (const auto& c : counts) {
    cb.messages += c.messages();
    cb.bytes += c.bytes();
  }
  return cb;
}

// ---------------------------------------------------------------------------
// Exact count accounting
// ---------------------------------------------------------------------------

std::vector<LevelCounts> implied_counts(const std::vector<LevelLayout>& layouts,
                                        int nu1, int nu2, RedistMode mode,
                                        int cycles) {
  const int L = static_cast<int>(layouts.size());
  std::vector<LevelCounts> out(static_cast<std::size_t>(L));

  for (int l = 1; l <= L - 1; ++l) {
    const LevelLayout& lay = layouts[static_cast<std::size_t>(l)];
    const bool finest = l == L - 1;
    const int nc = finest ? 2 : 4;
    const std::int64_t events =
        static_cast<std::int64_t>(nc) * (nu1 + nu2) + 2;  // smooth + residual + interp
    const std::int64_t mx = nonzero_widths(lay.cuts_x);
    const std::int64_t my = nonzero_widths(lay.cuts_y);
    const std::int64_t nx = lay.grid.dims[0], ny = lay.grid.dims[1];
    const std::int64_t msgs = 2 * (mx - 1) * my + 2 * (my - 1) * mx;
    const std::int64_t bytes = (2 * (mx - 1) * ny + 2 * (my - 1) * nx) * 8;
    LevelCounts& c = out[static_cast<std::size_t>(l)];
    c.exchange_messages = events * msgs * cycles;
    c.exchange_bytes = events * bytes * cycles;
  }

  for (int l = L - 1; l >= 0; --l) {
    const LevelLayout& lay = layouts[static_cast<std::size_t>(l)];
    if (!lay.redistributed) continue;
    const std::int64_t pfx = lay.procs_above.dims[0];
    const std::int64_t pfy = lay.procs_above.dims[1];
    const std::int64_t pcx = lay.procs.dims[0], pcy = lay.procs.dims[1];
    const std::int64_t rx = ceil_div(pfx, pcx), ry = ceil_div(pfy, pcy);
    LevelCounts& c = out[static_cast<std::size_t>(l)];
    for (std::int64_t cj = 0; cj < pcy; ++cj)
      for (std::int64_t ci = 0; ci < pcx; ++ci) {
        const std::int64_t dx0 = std::min(ci * rx, pfx);
        const std::int64_t dx1 = std::min((ci + 1) * rx, pfx);
        const std::int64_t dy0 = std::min(cj * ry, pfy);
        const std::int64_t dy1 = std::min((cj + 1) * ry, pfy);
        const std::int64_t members = (dx1 - dx0) * (dy1 - dy0);
        if (members <= 1) continue;
        const auto piece = [&](std::int64_t dx, std::int64_t dy) {
          return (lay.donor_cuts_x[static_cast<std::size_t>(dx + 1)] -
                  lay.donor_cuts_x[static_cast<std::size_t>(dx)]) *
                 (lay.donor_cuts_y[static_cast<std::size_t>(dy + 1)] -
                  lay.donor_cuts_y[static_cast<std::size_t>(dy)]);
        };
        const std::int64_t union_points =
            (lay.cuts_x[static_cast<std::size_t>(ci + 1)] -
             lay.cuts_x[static_cast<std::size_t>(ci)]) *
            (lay.cuts_y[static_cast<std::size_t>(cj + 1)] -
             lay.cuts_y[static_cast<std::size_t>(cj)]);
        const std::int64_t root_points = piece(dx0, dy0);
        const std::int64_t tree_msgs = ceil_log2(members);
        if (mode == RedistMode::Redundant) {
          c.allgather_messages += tree_msgs * cycles;
          c.allgather_bytes += (members - 1) * union_points * 8 * cycles;
        } else {
          c.gather_messages += tree_msgs * cycles;
          c.gather_bytes += (union_points - root_points) * 8 * cycles;
          c.scatter_messages += tree_msgs * cycles;
          c.scatter_bytes += (union_points - root_points) * 8 * cycles;
        }
      }
  }
  return out;
}

}  // namespace mgredist
