#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "mgredist/redist.hpp"

using namespace mgredist;

namespace {

const MachineParams kBW = MachineParams::blue_waters();

PlanProblem problem(std::int64_t gx, std::int64_t gy, std::int64_t px,
                    std::int64_t py) {
  PlanProblem p;
  p.fine = GlobalGrid(Dims::of(gx, gy));
  p.procs = ProcessorGrid(Dims::of(px, py));
  return p;
}

// exhaustive optimum from a given node, used as the admissibility oracle
double remaining_optimum(const SearchGraph& g, int node,
                         const MachineParams& m) {
  double best = g.stop_cost(node, m);
  for (int s : g.nodes()[static_cast<std::size_t>(node)].succ)
    best = std::min(best, g.edge_cost(node, s, m) + remaining_optimum(g, s, m));
  return best;
}

}  // namespace

TEST_CASE("redistribution trigger thresholds") {
  TriggerThresholds t;
  LocalExtent big;
  big.dims = Dims::of(568, 71);
  CHECK_FALSE(redistribution_trigger(big, t));
  LocalExtent thin;
  thin.dims = Dims::of(2, 8);
  CHECK(redistribution_trigger(thin, t));
  LocalExtent exact;
  exact.dims = Dims::of(4, 4);
  CHECK_FALSE(redistribution_trigger(exact, t));  // 16 points is not < 16
}

TEST_CASE("enumeration reproduces the 16x8 redistribution table") {
  const auto cands = enumerate_coarse_grids(ProcessorGrid(Dims::of(16, 8)),
                                            GlobalGrid(Dims::of(1136, 71)));
  const std::vector<std::pair<Dims, Dims>> expect = {
      {Dims::of(1, 1), Dims::of(1136, 71)}, {Dims::of(2, 1), Dims::of(568, 71)},
      {Dims::of(4, 1), Dims::of(284, 71)},  {Dims::of(8, 1), Dims::of(142, 71)},
      {Dims::of(16, 1), Dims::of(71, 71)},  {Dims::of(16, 2), Dims::of(71, 36)},
      {Dims::of(16, 4), Dims::of(71, 18)}};
  REQUIRE(cands.size() == expect.size());
  for (std::size_t k = 0; k < expect.size(); ++k) {
    CHECK(cands[k].dims == expect[k].first);
    CHECK(agglomerated_local(GlobalGrid(Dims::of(1136, 71)), cands[k]) ==
          expect[k].second);
  }
}

TEST_CASE("enumeration corner cases") {
  CHECK(enumerate_coarse_grids(ProcessorGrid(Dims::of(1, 1)),
                               GlobalGrid(Dims::of(50, 50)))
            .empty());
  const auto cands = enumerate_coarse_grids(ProcessorGrid(Dims::of(4, 1)),
                                            GlobalGrid(Dims::of(100, 1)));
  REQUIRE(cands.size() == 2);
  CHECK(cands[0].dims == Dims::of(1, 1));
  CHECK(cands[1].dims == Dims::of(2, 1));
}

TEST_CASE("enumeration length is bounded by ceil(log2 np) + 1") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> pdim(1, 64);
  std::uniform_int_distribution<std::int64_t> gdim(3, 5000);
  for (int trial = 0; trial < 200; ++trial) {
    const ProcessorGrid p(Dims::of(pdim(rng), pdim(rng)));
    if (p.total() <= 1) continue;
    const GlobalGrid g(Dims::of(gdim(rng), gdim(rng)));
    const auto cands = enumerate_coarse_grids(p, g);
    const double bound = std::ceil(std::log2(static_cast<double>(p.total())));
    CHECK(static_cast<double>(cands.size()) <= bound + 1.0);
    for (const auto& c : cands) {
      CHECK(c.dims.all_le(p.dims));
      CHECK(c.total() < p.total());
    }
  }
}

TEST_CASE("search space root successors match the published enumeration") {
  const SearchGraph g = build_search_space(problem(9088, 568, 16, 8));
  const auto& root = g.nodes()[static_cast<std::size_t>(g.root())];
  REQUIRE(root.succ.size() == 7);
  const std::vector<Dims> expect = {Dims::of(1, 1),  Dims::of(2, 1),
                                    Dims::of(4, 1),  Dims::of(8, 1),
                                    Dims::of(16, 1), Dims::of(16, 2),
                                    Dims::of(16, 4)};
  for (std::size_t k = 0; k < expect.size(); ++k)
    CHECK(g.nodes()[static_cast<std::size_t>(root.succ[k])].proc.dims ==
          expect[k]);
}

TEST_CASE("single-rank problems give a single-node graph") {
  const SearchGraph g = build_search_space(problem(65, 65, 1, 1));
  CHECK(g.nodes().size() == 1);
  CHECK(g.nodes()[0].succ.empty());
}

TEST_CASE("brute-force path counts follow the doubling recurrence") {
  for (int h = 0; h <= 6; ++h) {
    const std::int64_t p = std::int64_t{1} << h;
    const SearchGraph g = build_search_space(problem(3 * p, 6 * p, p, 1));
    const auto [path, stats] = search_brute(g, kBW);
    CHECK(stats.expanded_nodes == (std::int64_t{1} << h));
    CHECK(path.states.back().proc.total() == 1);
  }
}

TEST_CASE("A* equals brute force and expands no more paths") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> hx(0, 5), hy(0, 5);
  std::uniform_int_distribution<std::int64_t> local(3, 600);
  const MachineParams machines[3] = {kBW, {1e-5, 1e-9, 1e-10}, {0.0, 5e-9, 1e-9}};
  int tested = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::int64_t px = std::int64_t{1} << hx(rng);
    const std::int64_t py = std::int64_t{1} << hy(rng);
    if (px * py > 1024) continue;
    const PlanProblem prob = problem(local(rng) * px, local(rng) * py, px, py);
    const SearchGraph g = build_search_space(prob);
    const MachineParams& m = machines[trial % 3];
    const auto [bp, bs] = search_brute(g, m);
    const auto [ap, as] = search_astar(g, m);
    CHECK(ap.total == bp.total);
    CHECK(as.expanded_nodes <= bs.expanded_nodes);
    ++tested;
  }
  CHECK(tested >= 20);
}

TEST_CASE("the default heuristic is admissible") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> hx(0, 4), hy(0, 4);
  std::uniform_int_distribution<std::int64_t> local(3, 300);
  for (int trial = 0; trial < 15; ++trial) {
    const std::int64_t px = std::int64_t{1} << hx(rng);
    const std::int64_t py = std::int64_t{1} << hy(rng);
    const PlanProblem prob = problem(local(rng) * px, local(rng) * py, px, py);
    const SearchGraph g = build_search_space(prob);
    for (int n = 0; n < static_cast<int>(g.nodes().size()); ++n)
      CHECK(g.heuristic(n, kBW) <= remaining_optimum(g, n, kBW) * (1 + 1e-13));
  }
}

TEST_CASE("heuristic on a bottomed-out single rank is the solve flop bound") {
  // single-level single-rank problem: only the Cholesky compute term remains
  const PlanProblem prob = problem(3, 3, 1, 1);
  const SearchGraph g = build_search_space(prob);
  CHECK(g.heuristic(g.root(), kBW) == 81.0 * kBW.gamma);
}

TEST_CASE("free communication makes the single-rank heuristic exact") {
  const MachineParams compute_only{0.0, 0.0, 1e-9};
  const PlanProblem prob = problem(129, 65, 1, 1);
  const SearchGraph g = build_search_space(prob);
  const auto [bp, bs] = search_brute(g, compute_only);
  CHECK(g.heuristic(g.root(), compute_only) == doctest::Approx(bp.total));
}

TEST_CASE("path_cost_g accumulates edge costs") {
  const PlanProblem prob = problem(1136, 71, 16, 8);
  const SearchGraph g = build_search_space(prob);
  const MachineParams& m = kBW;
  CHECK(path_cost_g(g, {g.root()}, m) == 0.0);
  const auto& root = g.nodes()[static_cast<std::size_t>(g.root())];
  REQUIRE_FALSE(root.succ.empty());
  const int s = root.succ[2];
  CHECK(path_cost_g(g, {g.root(), s}, m) == g.edge_cost(g.root(), s, m));
  CHECK(g.edge_cost(g.root(), s, m) > 0.0);
}

TEST_CASE("edge costs equal level sums plus the agglomeration") {
  const PlanProblem prob = problem(1136, 71, 16, 8);
  const SearchGraph g = build_search_space(prob);
  const auto& root = g.nodes()[static_cast<std::size_t>(g.root())];
  REQUIRE(root.trigger_level >= 1);
  const int sidx = root.succ[1];
  const auto& succ = g.nodes()[static_cast<std::size_t>(sidx)];

  double manual = 0.0;
  for (int l = root.level; l > succ.level; --l) {
    LevelShape sh;
    sh.global_dims = g.grids()[static_cast<std::size_t>(l)].dims;
    sh.proc_dims = root.proc.dims;
    sh.local_dims =
        agglomerated_local(g.grids()[static_cast<std::size_t>(l)], root.proc);
    sh.stencil_points = (l + 1 == static_cast<int>(g.grids().size())) ? 5 : 9;
    sh.colors = (l + 1 == static_cast<int>(g.grids().size())) ? 2 : 4;
    sh.nu1 = prob.nu1;
    sh.nu2 = prob.nu2;
    const Dims coarse_local = agglomerated_local(
        g.grids()[static_cast<std::size_t>(l - 1)], root.proc);
    manual += t_smooth(sh, kBW) + t_residual(sh, kBW) + t_restrict(sh, kBW) +
              t_interp(sh, coarse_local, kBW, 2);
  }
  const ProcBlock block = agglomerate_blocks(
      root.proc, succ.proc, g.grids()[static_cast<std::size_t>(succ.level)]);
  manual += t_agglomerate(block, prob.mode, kBW);
  CHECK(g.edge_cost(g.root(), sidx, kBW) == manual);
}

TEST_CASE("searches are deterministic across runs") {
  const PlanProblem prob = problem(568 * 8, 71 * 4, 8, 4);
  const SearchGraph g1 = build_search_space(prob);
  const SearchGraph g2 = build_search_space(prob);
  const auto [p1, s1] = search_astar(g1, kBW);
  const auto [p2, s2] = search_astar(g2, kBW);
  CHECK(p1.total == p2.total);
  CHECK(p1.arrows() == p2.arrows());
  CHECK(s1.expanded_nodes == s2.expanded_nodes);
}

TEST_CASE("the weighted heuristic variant still returns a valid path") {
  const PlanProblem prob = problem(568 * 8, 71 * 4, 8, 4);
  const SearchGraph g = build_search_space(prob);
  SearchOptions opt;
  opt.heuristic = HeuristicKind::WeightedGridProc;
  const auto [path, stats] = search_astar(g, kBW, opt);
  CHECK(path.states.back().proc.total() == 1);
  CHECK(path.total > 0.0);
  for (std::size_t k = 1; k < path.states.size(); ++k)
    CHECK(path.states[k].proc.total() < path.states[k - 1].proc.total());
}

TEST_CASE("returned paths end at one rank with valid transitions") {
  const PlanProblem prob = problem(568 * 16, 71 * 8, 16, 8);
  const SearchGraph g = build_search_space(prob);
  const auto [path, stats] = search_brute(g, kBW);
  CHECK(path.states.back().proc.dims == Dims::of(1, 1));
  CHECK(stats.expanded_nodes >= stats.path_length);
  for (std::size_t k = 1; k < path.states.size(); ++k) {
    CHECK(path.states[k].proc.total() < path.states[k - 1].proc.total());
    CHECK(path.states[k].proc.dims.all_le(path.states[k - 1].proc.dims));
  }
}

TEST_CASE("explicit path evaluation accepts the published alternates") {
  PlanProblem prob = problem(568 * 64, 71 * 32, 64, 32);
  const MachineParams& m = kBW;
  // a hop outside the greedy enumeration is still a valid tensor agglomeration
  const PathEval ev = evaluate_path(
      prob, {ProcessorGrid(Dims::of(16, 2)), ProcessorGrid(Dims::of(1, 1))}, m);
  CHECK(ev.valid);
  CHECK(ev.path.total > 0.0);
  CHECK(ev.path.arrows() == "64x32 -> 16x2 -> 1x1");
}

TEST_CASE("explicit path evaluation flags bad transitions") {
  PlanProblem prob = problem(568 * 4, 71 * 2, 4, 2);
  const PathEval grown = evaluate_path(
      prob, {ProcessorGrid(Dims::of(8, 1))}, kBW);
  CHECK_FALSE(grown.valid);
  // more hops than redistribution opportunities
  const PathEval leftover =
      evaluate_path(prob,
                    {ProcessorGrid(Dims::of(2, 1)), ProcessorGrid(Dims::of(1, 1)),
                     ProcessorGrid(Dims::of(1, 1))},
                    kBW);
  CHECK_FALSE(leftover.valid);
}

TEST_CASE("an empty hop list means no redistribution before the solve") {
  PlanProblem prob = problem(568 * 4, 71 * 2, 4, 2);
  const PathEval ev = evaluate_path(prob, {}, kBW);
  CHECK(ev.valid);
  CHECK(ev.path.arrows() == "4x2");  // implicit gather-to-one at the bottom
  CHECK(ev.path.states.back().proc.total() == 1);
}

TEST_CASE("arrow notation parses and round-trips") {
  const ProcessorGrid initial(Dims::of(64, 32));
  const auto hops =
      parse_path_arrows("64x32 -> 64x16 -> 32x2 -> 1x1", initial);
  REQUIRE(hops.size() == 3);
  CHECK(hops[0].dims == Dims::of(64, 16));
  CHECK(hops[2].dims == Dims::of(1, 1));
  // leading initial grid is optional
  CHECK(parse_path_arrows("64x16 -> 1x1", initial).size() == 2);
  CHECK(parse_path_arrows("64x32", initial).empty());
  CHECK_THROWS_AS(parse_path_arrows("64x32 -> banana", initial),
                  std::invalid_argument);
}
