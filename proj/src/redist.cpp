#include "mgredist/redist.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

namespace mgredist {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ProcessorGrid one_rank() { return ProcessorGrid(Dims::of(1, 1)); }

}  // namespace

bool redistribution_trigger(const LocalExtent& local,
                            const TriggerThresholds& t) {
  return local.dims.min() < t.min_extent || local.points() < t.min_points;
}

std::vector<ProcessorGrid> enumerate_coarse_grids(const ProcessorGrid& proc,
                                                  const GlobalGrid& grid) {
  std::vector<ProcessorGrid> out;
  if (proc.total() <= 1) return out;
  Dims cur = Dims::of(1, 1);
  cur.ndim = proc.ndim();
  for (int d = 0; d < cur.ndim; ++d) cur[d] = 1;
  out.push_back(ProcessorGrid(cur));
  for (;;) {
    int best = -1;
    std::int64_t best_extent = -1;
    for (int d = 0; d < cur.ndim; ++d) {
      if (cur[d] * 2 > proc.dims[d]) continue;
      const std::int64_t extent = ceil_div(grid.dims[d], cur[d]);
      if (extent > best_extent) {
        best = d;
        best_extent = extent;
      }
    }
    if (best < 0) break;
    Dims next = cur;
    next[best] *= 2;
    if (next.product() >= proc.total()) break;
    out.push_back(ProcessorGrid(next));
    cur = next;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared model-cost helpers (one accumulation order everywhere, so search
// totals and explicit path evaluations agree bit for bit)
// ---------------------------------------------------------------------------

namespace {

LevelShape make_shape(const std::vector<GlobalGrid>& grids, int level,
                      const ProcessorGrid& p, int nu1, int nu2) {
  LevelShape s;
  s.global_dims = grids[static_cast<std::size_t>(level)].dims;
  s.proc_dims = p.dims;
  s.local_dims = agglomerated_local(grids[static_cast<std::size_t>(level)], p);
  const bool finest = level + 1 == static_cast<int>(grids.size());
  s.stencil_points = finest ? 5 : 9;
  s.colors = finest ? 2 : 4;
  s.nu1 = nu1;
  s.nu2 = nu2;
  return s;
}

double model_level_cost(const std::vector<GlobalGrid>& grids, int level,
                        const ProcessorGrid& p, int nu1, int nu2,
                        const MachineParams& m) {
  const LevelShape sh = make_shape(grids, level, p, nu1, nu2);
  const Dims coarse_local =
      agglomerated_local(grids[static_cast<std::size_t>(level - 1)], p);
  return t_smooth(sh, m) + t_residual(sh, m) + t_restrict(sh, m) +
         t_interp(sh, coarse_local, m, sh.local_dims.ndim);
}

double model_edge_cost(const std::vector<GlobalGrid>& grids, int from_level,
                       const ProcessorGrid& from_proc, int to_level,
                       const ProcessorGrid& to_proc, int nu1, int nu2,
                       RedistMode mode, const MachineParams& m) {
  double cost = 0.0;
  for (int l = from_level; l > to_level; --l)
    cost += model_level_cost(grids, l, from_proc, nu1, nu2, m);
  const ProcBlock block = agglomerate_blocks(
      from_proc, to_proc, grids[static_cast<std::size_t>(to_level)]);
  return cost + t_agglomerate(block, mode, m);
}

double model_stop_cost(const std::vector<GlobalGrid>& grids, int from_level,
                       const ProcessorGrid& proc, int nu1, int nu2,
                       RedistMode mode, const MachineParams& m) {
  double cost = 0.0;
  for (int l = from_level; l >= 1; --l)
    cost += model_level_cost(grids, l, proc, nu1, nu2, m);
  const ProcBlock block0 = agglomerate_blocks(proc, one_rank(), grids.front());
  return cost + t_cgsolve(grids.front(), block0, m, mode);
}

}  // namespace

// ---------------------------------------------------------------------------
// Search space
// ---------------------------------------------------------------------------

SearchGraph build_search_space(const PlanProblem& prob) {
  SearchGraph g;
  g.prob_ = prob;
  g.grids_ = coarsening_levels(prob.fine, prob.coarse_threshold);
  const int L = static_cast<int>(g.grids_.size());

  // prefix sums of global flops per level for the admissible bound
  g.flops_below_.assign(static_cast<std::size_t>(L), 0.0);
  for (int l = 1; l < L; ++l) {
    const double pts =
        static_cast<double>(g.grids_[static_cast<std::size_t>(l)].points());
    const double cpts =
        static_cast<double>(g.grids_[static_cast<std::size_t>(l - 1)].points());
    const double csum = static_cast<double>(
        g.grids_[static_cast<std::size_t>(l - 1)].dims.sum());
    const double ns = l + 1 == L ? 5.0 : 9.0;
    const double sweeps = static_cast<double>(prob.nu1 + prob.nu2);
    const double flops = 2.0 * ns * pts * sweeps   // smoothing
                         + 2.0 * ns * pts          // residual
                         + 2.0 * ns * pts          // restriction
                         + (pts + 20.0 * cpts + 6.0 * csum);  // interpolation
    g.flops_below_[static_cast<std::size_t>(l)] =
        g.flops_below_[static_cast<std::size_t>(l - 1)] + flops;
  }
  const double cg = static_cast<double>(g.grids_.front().points());
  g.cg_flops_ = cg * cg;

  std::map<std::pair<std::array<std::int64_t, kMaxDims>, int>, int> index;
  const auto intern = [&](const ProcessorGrid& p, int level) {
    const auto key = std::make_pair(p.dims.v, level);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(g.nodes_.size());
    index.emplace(key, id);
    g.nodes_.push_back(SearchGraph::Node{p, level, -1, {}});
    return id;
  };

  intern(prob.procs, L - 1);
  for (std::size_t at = 0; at < g.nodes_.size(); ++at) {
    // find the next trigger below this node's takeover level
    int trig = -1;
    for (int l = g.nodes_[at].level - 1; l >= 1; --l) {
      LocalExtent worst;
      worst.dims = min_local_dims(g.grids_[static_cast<std::size_t>(l)],
                                  g.nodes_[at].proc);
      if (redistribution_trigger(worst, prob.trigger)) {
        trig = l;
        break;
      }
    }
    g.nodes_[at].trigger_level = trig;
    if (trig < 0) continue;
    const auto cands = enumerate_coarse_grids(
        g.nodes_[at].proc, g.grids_[static_cast<std::size_t>(trig)]);
    for (const auto& c : cands) {
      const int id = intern(c, trig);
      g.nodes_[at].succ.push_back(id);
    }
  }
  return g;
}

double SearchGraph::edge_cost(int from, int to, const MachineParams& m) const {
  const Node& u = nodes_[static_cast<std::size_t>(from)];
  const Node& v = nodes_[static_cast<std::size_t>(to)];
  return model_edge_cost(grids_, u.level, u.proc, v.level, v.proc, prob_.nu1,
                         prob_.nu2, prob_.mode, m);
}

double SearchGraph::stop_cost(int node, const MachineParams& m) const {
  const Node& u = nodes_[static_cast<std::size_t>(node)];
  return model_stop_cost(grids_, u.level, u.proc, prob_.nu1, prob_.nu2,
                         prob_.mode, m);
}

double SearchGraph::heuristic(int node, const MachineParams& m,
                              const SearchOptions& opt) const {
  const Node& u = nodes_[static_cast<std::size_t>(node)];
  if (opt.heuristic == HeuristicKind::WeightedGridProc) {
    const double grid_pts =
        static_cast<double>(grids_[static_cast<std::size_t>(u.level)].points());
    const double ranks = static_cast<double>(u.proc.total());
    return opt.weight_grid * grid_pts * m.gamma +
           opt.weight_proc * std::log2(ranks + 1.0) * m.alpha;
  }
  // communication-free, perfectly balanced remaining work: a lower bound
  return flops_below_[static_cast<std::size_t>(u.level)] * m.gamma /
             static_cast<double>(u.proc.total()) +
         cg_flops_ * m.gamma;
}

double path_cost_g(const SearchGraph& g, const std::vector<int>& prefix,
                   const MachineParams& m) {
  double cost = 0.0;
  for (std::size_t k = 0; k + 1 < prefix.size(); ++k)
    cost += g.edge_cost(prefix[k], prefix[k + 1], m);
  return cost;
}

// ---------------------------------------------------------------------------
// Path assembly
// ---------------------------------------------------------------------------

namespace {

RedistPath assemble_path(const SearchGraph& g, const std::vector<int>& chain,
                         const MachineParams& m) {
  const auto& grids = g.grids();
  RedistPath p;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const auto& n = g.nodes()[static_cast<std::size_t>(chain[k])];
    p.states.push_back(RedistState{
        n.proc, grids[static_cast<std::size_t>(n.level)], n.level});
    if (k > 0) {
      const auto& prev = g.nodes()[static_cast<std::size_t>(chain[k - 1])];
      const ProcBlock block = agglomerate_blocks(
          prev.proc, n.proc, grids[static_cast<std::size_t>(n.level)]);
      p.transition_cost.push_back(t_agglomerate(block, g.problem().mode, m));
    }
  }
  const auto& last = g.nodes()[static_cast<std::size_t>(chain.back())];
  if (last.proc.total() > 1) {
    const ProcBlock block0 =
        agglomerate_blocks(last.proc, one_rank(), grids.front());
    p.states.push_back(RedistState{one_rank(), grids.front(), 0});
    p.transition_cost.push_back(t_agglomerate(block0, g.problem().mode, m));
  }
  return p;
}

}  // namespace

std::vector<Takeover> RedistPath::takeovers() const {
  std::vector<Takeover> tk;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (k > 0 && states[k].depth == 0) continue;  // implicit gather-to-one
    tk.push_back(Takeover{states[k].proc, states[k].depth});
  }
  return tk;
}

std::string RedistPath::arrows() const {
  std::string s;
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (k > 0 && states[k].depth == 0) continue;  // implicit tail
    if (!s.empty()) s += " -> ";
    s += states[k].proc.dims.str();
  }
  return s;
}

// ---------------------------------------------------------------------------
// Searches
// ---------------------------------------------------------------------------

std::pair<RedistPath, SearchStats> search_brute(const SearchGraph& g,
                                                const MachineParams& m) {
  const auto t0 = Clock::now();
  SearchStats stats;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> chain{g.root()}, best_chain;

  const std::function<void(int, double)> rec = [&](int node, double acc) {
    const double total = acc + g.stop_cost(node, m);
    ++stats.expanded_nodes;
    if (total < best) {
      best = total;
      best_chain = chain;
    }
    for (int s : g.nodes()[static_cast<std::size_t>(node)].succ) {
      chain.push_back(s);
      rec(s, acc + g.edge_cost(node, s, m));
      chain.pop_back();
    }
  };
  rec(g.root(), 0.0);

  RedistPath path = assemble_path(g, best_chain, m);
  path.total = best;
  stats.path_length = static_cast<int>(path.states.size());
  stats.wall_time = seconds_since(t0);
  return {path, stats};
}

std::pair<RedistPath, SearchStats> search_astar(const SearchGraph& g,
                                                const MachineParams& m,
                                                const SearchOptions& opt) {
  const auto t0 = Clock::now();
  SearchStats stats;
  const int n = static_cast<int>(g.nodes().size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(n), kInf);
  std::vector<int> parent(static_cast<std::size_t>(n), -1);

  // ordering: f, then fewer ranks, then lexicographic dims, then level
  struct Entry {
    double f;
    std::int64_t ranks;
    std::array<std::int64_t, kMaxDims> dims;
    int level;
    int node;
    double gval;
  };
  const auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.ranks != b.ranks) return a.ranks > b.ranks;
    if (a.dims != b.dims) return a.dims > b.dims;
    return a.level > b.level;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);

  dist[static_cast<std::size_t>(g.root())] = 0.0;
  const auto& rootn = g.nodes()[static_cast<std::size_t>(g.root())];
  open.push(Entry{g.heuristic(g.root(), m, opt), rootn.proc.total(),
                  rootn.proc.dims.v, rootn.level, g.root(), 0.0});

  double best = kInf;
  int best_node = -1;
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (best_node >= 0 && e.f >= best) break;  // admissible bound: done
    if (e.gval > dist[static_cast<std::size_t>(e.node)]) continue;  // stale
    ++stats.expanded_nodes;

    const double total = e.gval + g.stop_cost(e.node, m);
    if (total < best) {
      best = total;
      best_node = e.node;
    }
    for (int s : g.nodes()[static_cast<std::size_t>(e.node)].succ) {
      const double ng = e.gval + g.edge_cost(e.node, s, m);
      if (ng < dist[static_cast<std::size_t>(s)]) {
        dist[static_cast<std::size_t>(s)] = ng;
        parent[static_cast<std::size_t>(s)] = e.node;
        const auto& sn = g.nodes()[static_cast<std::size_t>(s)];
        open.push(Entry{ng + g.heuristic(s, m, opt), sn.proc.total(),
                        sn.proc.dims.v, sn.level, s, ng});
      }
    }
  }
  if (best_node < 0) throw std::runtime_error("search_astar: no path to goal");

  std::vector<int> chain;
  for (int v = best_node; v >= 0; v = parent[static_cast<std::size_t>(v)])
    chain.push_back(v);
  std::reverse(chain.begin(), chain.end());

  RedistPath path = assemble_path(g, chain, m);
  path.total = best;
  stats.path_length = static_cast<int>(path.states.size());
  stats.wall_time = seconds_since(t0);
  return {path, stats};
}

// ---------------------------------------------------------------------------
// Explicit paths
// ---------------------------------------------------------------------------

PathEval evaluate_path(const PlanProblem& prob,
                       const std::vector<ProcessorGrid>& hops,
                       const MachineParams& m) {
  PathEval ev;
  const std::vector<GlobalGrid> grids =
      coarsening_levels(prob.fine, prob.coarse_threshold);
  const int L = static_cast<int>(grids.size());

  ProcessorGrid cur = prob.procs;
  int cur_level = L - 1;
  std::size_t hop = 0;
  double total = 0.0;

  ev.path.states.push_back(RedistState{cur, grids.back(), L - 1});
  int l = cur_level - 1;
  while (l >= 1 && hop < hops.size()) {
    LocalExtent worst;
    worst.dims = min_local_dims(grids[static_cast<std::size_t>(l)], cur);
    if (!redistribution_trigger(worst, prob.trigger)) {
      --l;
      continue;
    }
    const ProcessorGrid& next = hops[hop];
    if (!next.dims.all_le(cur.dims) || next.total() >= cur.total()) {
      ev.error = "transition " + cur.dims.str() + " -> " + next.dims.str() +
                 " does not shrink the processor grid";
      return ev;
    }
    total += model_edge_cost(grids, cur_level, cur, l, next, prob.nu1,
                             prob.nu2, prob.mode, m);
    const ProcBlock block =
        agglomerate_blocks(cur, next, grids[static_cast<std::size_t>(l)]);
    ev.path.states.push_back(
        RedistState{next, grids[static_cast<std::size_t>(l)], l});
    ev.path.transition_cost.push_back(t_agglomerate(block, prob.mode, m));
    cur = next;
    cur_level = l;
    ++hop;
    --l;
  }
  if (hop < hops.size()) {
    ev.error = "no redistribution point left for hop " +
               hops[hop].dims.str();
    return ev;
  }
  total += model_stop_cost(grids, cur_level, cur, prob.nu1, prob.nu2,
                           prob.mode, m);
  if (cur.total() > 1) {
    const ProcBlock block0 = agglomerate_blocks(cur, one_rank(), grids.front());
    ev.path.states.push_back(RedistState{one_rank(), grids.front(), 0});
    ev.path.transition_cost.push_back(t_agglomerate(block0, prob.mode, m));
  }
  ev.path.total = total;
  ev.breakdown = t_vcycle(plan_layouts(prob.fine, ev.path.takeovers(),
                                       prob.coarse_threshold),
                          prob.nu1, prob.nu2, prob.mode, m);
  ev.valid = true;
  return ev;
}

std::vector<ProcessorGrid> parse_path_arrows(const std::string& line,
                                             const ProcessorGrid& initial) {
  std::vector<ProcessorGrid> out;
  std::string token;
  std::vector<std::string> tokens;
  for (std::size_t k = 0; k <= line.size(); ++k) {
    if (k + 1 < line.size() && line[k] == '-' && line[k + 1] == '>') {
      tokens.push_back(token);
      token.clear();
      ++k;
      continue;
    }
    if (k < line.size() && !std::isspace(static_cast<unsigned char>(line[k])))
      token += line[k];
    if (k == line.size()) tokens.push_back(token);
  }
  const auto parse_grid = [](const std::string& t) {
    const auto x = t.find_first_of("xX");
    if (x == std::string::npos || x == 0 || x + 1 >= t.size())
      throw std::invalid_argument("path: malformed grid '" + t + "'");
    std::size_t pos1 = 0, pos2 = 0;
    const std::int64_t a = std::stoll(t.substr(0, x), &pos1);
    const std::int64_t b = std::stoll(t.substr(x + 1), &pos2);
    if (pos1 != x || pos2 != t.size() - x - 1)
      throw std::invalid_argument("path: malformed grid '" + t + "'");
    return ProcessorGrid(Dims::of(a, b));
  };
  bool first = true;
  for (const auto& t : tokens) {
    if (t.empty()) continue;
    const ProcessorGrid p = parse_grid(t);
    if (first && p == initial) {
      first = false;
      continue;  // leading token restates the initial grid
    }
    first = false;
    out.push_back(p);
  }
  return out;
}

}  // namespace mgredist
