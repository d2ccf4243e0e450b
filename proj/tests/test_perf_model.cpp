#include <doctest.h>

#include <random>
#include <sstream>

#include "mgredist/perf_model.hpp"

using namespace mgredist;

namespace {

LevelShape shape2d(std::int64_t nx, std::int64_t ny, int ns, int nc, int nu1,
                   int nu2) {
  LevelShape s;
  s.local_dims = Dims::of(nx, ny);
  s.global_dims = Dims::of(nx, ny);
  s.proc_dims = Dims::of(1, 1);
  s.stencil_points = ns;
  s.colors = nc;
  s.nu1 = nu1;
  s.nu2 = nu2;
  return s;
}

const MachineParams kBW = MachineParams::blue_waters();
const MachineParams kFree{0.0, 0.0, 0.0};

}  // namespace

TEST_CASE("t_exchange matches the hand-evaluated Blue Waters value") {
  LevelShape s = shape2d(10, 10, 9, 4, 2, 1);
  const double expect = 2.0 * 2.0 * 0.65e-6 + 2.0 * 20.0 * 8.0 * 5.65e-9;
  CHECK(t_exchange(s, kBW, 2) == expect);
  CHECK(t_exchange(s, kBW, 2) == doctest::Approx(4.408e-6).epsilon(1e-12));
}

TEST_CASE("t_exchange is zero on a free network and carries the 2D alpha term") {
  LevelShape s = shape2d(10, 10, 9, 4, 2, 1);
  CHECK(t_exchange(s, kFree, 2) == 0.0);
  MachineParams alpha_only{1.0, 0.0, 0.0};
  CHECK(t_exchange(s, alpha_only, 2) == 4.0);
  LevelShape s3 = s;
  s3.local_dims = Dims::of(10, 10, 10);
  s3.global_dims = s3.local_dims;
  CHECK(t_exchange(s3, alpha_only, 3) == 6.0);
}

TEST_CASE("t_smooth flop term matches the 568x71 hand evaluation") {
  LevelShape s = shape2d(568, 71, 9, 4, 2, 1);
  MachineParams gamma_only{0.0, 0.0, 0.44e-9};
  const double expect = 2.0 * 9.0 * 40328.0 * 3.0 * 0.44e-9;
  CHECK(t_smooth(s, gamma_only) == expect);

  LevelShape s0 = s;
  s0.nu1 = s0.nu2 = 0;
  CHECK(t_smooth(s0, kBW) == 0.0);

  LevelShape more_colors = s;
  more_colors.colors = 5;
  CHECK(t_smooth(more_colors, kBW) - t_smooth(s, kBW) ==
        doctest::Approx(3.0 * t_exchange(s, kBW, 2)).epsilon(1e-12));
}

TEST_CASE("t_residual and t_restrict split the exchange") {
  LevelShape s = shape2d(4, 4, 9, 4, 2, 1);
  MachineParams gamma_one{0.0, 0.0, 1.0};
  CHECK(t_residual(s, gamma_one) == 288.0);
  CHECK(t_restrict(s, gamma_one) == 288.0);
  MachineParams no_flops{1e-6, 1e-9, 0.0};
  CHECK(t_residual(s, no_flops) == t_exchange(s, no_flops, 2));
  CHECK(t_restrict(s, no_flops) == 0.0);
  CHECK(t_restrict(s, kBW) < t_residual(s, kBW));
}

TEST_CASE("t_interp matches the printed 2D and 3D formulas") {
  MachineParams gamma_one{0.0, 0.0, 1.0};
  LevelShape f2 = shape2d(9, 9, 9, 4, 2, 1);
  CHECK(t_interp(f2, Dims::of(5, 5), gamma_one, 2) == 641.0);
  LevelShape f3 = f2;
  f3.local_dims = Dims::of(9, 9, 9);
  CHECK(t_interp(f3, Dims::of(5, 5, 5), gamma_one, 3) == 8759.0);
  CHECK(t_interp(f2, Dims::of(5, 5), kFree, 2) == 0.0);
}

TEST_CASE("t_gather follows the tree-collective model") {
  ProcBlock none{Dims::of(1, 1), 1, 40};
  CHECK(t_gather(none, kBW) == 0.0);

  ProcBlock two{Dims::of(1, 2), 2, 1278};
  CHECK(t_gather(two, kBW) ==
        1.0 * 0.65e-6 + 1278.0 * 0.5 * 8.0 * 5.65e-9);

  ProcBlock four{Dims::of(2, 2), 4, 100};
  MachineParams beta_only{0.0, 2e-9, 0.0};
  CHECK(t_gather(four, beta_only) == 100.0 * 0.75 * 8.0 * 2e-9);
}

TEST_CASE("t_agglomerate case split") {
  CHECK(t_agglomerate(std::nullopt, RedistMode::NonRedundant, kBW) == 0.0);
  ProcBlock b{Dims::of(2, 2), 4, 500};
  CHECK(t_agglomerate(b, RedistMode::NonRedundant, kBW) ==
        2.0 * t_agglomerate(b, RedistMode::Redundant, kBW));

  // all-to-one over 64x32 ranks at a 1136x71 coarse grid
  ProcBlock all{Dims::of(64, 32), 2048, 1136 * 71};
  const double gather = 11.0 * kBW.alpha +
                        80656.0 * (2047.0 / 2048.0) * 8.0 * kBW.beta;
  CHECK(t_gather(all, kBW) == doctest::Approx(gather).epsilon(1e-14));
}

TEST_CASE("t_cgsolve adds the quadratic solve cost") {
  ProcBlock lone{Dims::of(1, 1), 1, 9};
  MachineParams gamma_one{0.0, 0.0, 1.0};
  CHECK(t_cgsolve(GlobalGrid(Dims::of(3, 3)), lone, gamma_one,
                  RedistMode::NonRedundant) == 81.0);
  CHECK(t_cgsolve(GlobalGrid(Dims::of(3, 3)), lone, kFree,
                  RedistMode::NonRedundant) == 0.0);
  CHECK(t_cgsolve(GlobalGrid(Dims::of(71, 71)), lone, kBW,
                  RedistMode::NonRedundant) ==
        doctest::Approx(5041.0 * 5041.0 * 0.44e-9).epsilon(1e-14));
}

TEST_CASE("single-level problems cost exactly the coarse solve") {
  const GlobalGrid g(Dims::of(3, 3));
  const auto layouts =
      plan_layouts(g, {Takeover{ProcessorGrid(Dims::of(1, 1)), 0}});
  REQUIRE(layouts.size() == 1);
  const CostBreakdown cb =
      t_vcycle(layouts, 2, 1, RedistMode::NonRedundant, kBW);
  CHECK(cb.smooth == 0.0);
  CHECK(cb.total == cb.cgsolve);
}

TEST_CASE("t_vcycle components add up exactly") {
  const GlobalGrid g(Dims::of(257, 129));
  const int L = static_cast<int>(coarsening_levels(g, 3).size());
  const auto layouts =
      plan_layouts(g, {Takeover{ProcessorGrid(Dims::of(4, 2)), L - 1}});
  const CostBreakdown cb =
      t_vcycle(layouts, 2, 1, RedistMode::NonRedundant, kBW);
  CHECK(cb.total == cb.smooth + cb.residual + cb.restriction + cb.interp +
                        cb.agglomerate + cb.cgsolve);
  CHECK(cb.total > 0.0);
}

TEST_CASE("costs are monotone in each machine parameter") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::int64_t> dim(1, 600);
  for (int trial = 0; trial < 50; ++trial) {
    LevelShape s = shape2d(dim(rng), dim(rng), trial % 2 ? 9 : 5,
                           trial % 2 ? 4 : 2, 2, 1);
    const Dims coarse = Dims::of((s.local_dims[0] + 1) / 2,
                                 (s.local_dims[1] + 1) / 2);
    const MachineParams base{1e-6, 1e-9, 1e-9};
    for (int which = 0; which < 3; ++which) {
      MachineParams bumped = base;
      (which == 0 ? bumped.alpha : which == 1 ? bumped.beta : bumped.gamma) *=
          2.0;
      CHECK(t_smooth(s, bumped) >= t_smooth(s, base));
      CHECK(t_residual(s, bumped) >= t_residual(s, base));
      CHECK(t_restrict(s, bumped) >= t_restrict(s, base));
      CHECK(t_interp(s, coarse, bumped, 2) >= t_interp(s, coarse, base, 2));
      ProcBlock b{Dims::of(2, 2), 4, s.local_dims.product()};
      CHECK(t_gather(b, bumped) >= t_gather(b, base));
    }
  }
}

TEST_CASE("zero machine makes every cost zero") {
  const GlobalGrid g(Dims::of(1136, 71));
  const int L = static_cast<int>(coarsening_levels(g, 3).size());
  const auto layouts =
      plan_layouts(g, {Takeover{ProcessorGrid(Dims::of(16, 8)), L - 1}});
  const CostBreakdown cb = t_vcycle(layouts, 2, 1, RedistMode::NonRedundant,
                                    kFree);
  CHECK(cb.total == 0.0);
}

TEST_CASE("machine files parse and ship the Blue Waters fixture") {
  const MachineParams m =
      MachineParams::from_file(std::string(MGREDIST_FIXTURES) +
                               "/bluewaters.machine");
  CHECK(m.alpha == kBW.alpha);
  CHECK(m.beta == kBW.beta);
  CHECK(m.gamma == kBW.gamma);

  std::istringstream bad("alpha_s 1e-6\nbeta_s_per_byte 1e-9\n");
  CHECK_THROWS_AS(MachineParams::parse(bad), std::runtime_error);
  std::istringstream unknown("alpha_s 1\nbeta_s_per_byte 1\ngamma_s_per_flop 1\nzeta 3\n");
  CHECK_THROWS_AS(MachineParams::parse(unknown), std::runtime_error);
}

TEST_CASE("plan_layouts keeps partitions aligned across levels") {
  const GlobalGrid g(Dims::of(33, 17));
  const ProcessorGrid p(Dims::of(4, 2));
  const auto grids = coarsening_levels(g, 3);
  const int L = static_cast<int>(grids.size());
  const auto layouts = plan_layouts(g, {Takeover{p, L - 1}});
  REQUIRE(static_cast<int>(layouts.size()) == L);

  // fine level tiles with the near-uniform rule
  CHECK(layouts.back().cuts_x == partition_cuts(33, 4));
  // every level's cuts cover the grid
  for (const auto& lay : layouts) {
    CHECK(lay.cuts_x.front() == 0);
    CHECK(lay.cuts_x.back() == lay.grid.dims[0]);
    CHECK(lay.cuts_y.back() == lay.grid.dims[1]);
  }
  // coarse level was forced onto one task and remembers its donors
  CHECK(layouts.front().procs.total() == 1);
  CHECK(layouts.front().redistributed);
  CHECK(layouts.front().procs_above == p);
}

TEST_CASE("plan_layouts validates takeover lists") {
  const GlobalGrid g(Dims::of(65, 65));
  const auto grids = coarsening_levels(g, 3);
  const int L = static_cast<int>(grids.size());
  const ProcessorGrid p(Dims::of(4, 4));
  CHECK_THROWS_AS(plan_layouts(g, {}), std::invalid_argument);
  CHECK_THROWS_AS(
      plan_layouts(g, {Takeover{p, L - 2}}),  // must start at the fine level
      std::invalid_argument);
  CHECK_THROWS_AS(
      plan_layouts(g, {Takeover{p, L - 1},
                       Takeover{ProcessorGrid(Dims::of(8, 8)), L - 2}}),
      std::invalid_argument);  // growing
}
