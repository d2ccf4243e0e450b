#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mgredist/sim.hpp"

using namespace mgredist;

namespace {

struct Setup {
  GlobalGrid grid;
  MGHierarchy h;
  GridFunction b;
  Setup(std::int64_t nx, std::int64_t ny, double r = 4.0, double aspect = 2.0)
      : grid(Dims::of(nx, ny)),
        h(build_hierarchy(
            discretize(DiffusionProblem::stretched(grid, r, aspect)), grid, 2,
            1, InterpMode::OperatorInduced)),
        b(discretize_rhs(DiffusionProblem::stretched(grid, r, aspect))) {}
};

RedistPath plan_for(const MGHierarchy& h, const ProcessorGrid& procs,
                    const std::vector<ProcessorGrid>& hops) {
  PlanProblem prob;
  prob.fine = h.fine_grid();
  prob.procs = procs;
  const PathEval ev = evaluate_path(prob, hops, MachineParams::blue_waters());
  REQUIRE(ev.valid);
  return ev.path;
}

RedistPath optimal_plan(const MGHierarchy& h, const ProcessorGrid& procs) {
  PlanProblem prob;
  prob.fine = h.fine_grid();
  prob.procs = procs;
  return search_astar(build_search_space(prob), MachineParams::blue_waters())
      .first;
}

double max_rel_diff(const GridFunction& a, const GridFunction& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    scale = std::max(scale, std::fabs(a.values[k]));
    diff = std::max(diff, std::fabs(a.values[k] - b.values[k]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace

TEST_CASE("single-rank runs log no communication") {
  Setup s(17, 17);
  auto [x, log] =
      vcycle_redist(s.h, plan_for(s.h, ProcessorGrid(Dims::of(1, 1)), {}),
                    GridFunction::zeros(s.grid), s.b, SimOptions{});
  CHECK(log.events.empty());
  CHECK(log.total_messages() == 0);
}

TEST_CASE("halo exchange moves boundary lines and counts model bytes") {
  Setup s(8, 4);
  DistributedSolver solver(
      s.h, plan_for(s.h, ProcessorGrid(Dims::of(2, 1)), {}), SimOptions{});
  // distinct values everywhere
  GridFunction x0 = GridFunction::zeros(s.grid);
  for (std::int64_t j = 0; j < 4; ++j)
    for (std::int64_t i = 0; i < 8; ++i)
      x0.ref(i, j) = static_cast<double>(100 * i + j);
  // wipe halos by re-distributing with a constant, then set interiors only
  solver.set_problem(x0, s.b);

  const int fine = solver.num_levels() - 1;
  solver.halo_exchange(fine, SimField::X);
  REQUIRE(solver.log().events.size() == 1);
  const Event& e = solver.log().events[0];
  CHECK(e.kind == EventKind::Exchange);
  CHECK(e.messages == 2);           // one each way across the single seam
  CHECK(e.bytes == 2 * 4 * 8);      // one 4-point line per direction
  // ghost values equal the neighbor's interior
  for (std::int64_t j = 0; j < 4; ++j) {
    CHECK(solver.rank_value(fine, 0, SimField::X, 4, j) == x0.at(4, j));
    CHECK(solver.rank_value(fine, 1, SimField::X, 3, j) == x0.at(3, j));
  }
}

TEST_CASE("gather reproduces the four 2x2 block collectives") {
  Setup s(32, 32);
  DistributedSolver solver(
      s.h,
      plan_for(s.h, ProcessorGrid(Dims::of(4, 4)),
               {ProcessorGrid(Dims::of(2, 2))}),
      SimOptions{});
  solver.set_problem(GridFunction::zeros(s.grid), s.b);
  solver.cycle();
  int gathers_at_takeover = 0;
  for (const Event& e : solver.log().events)
    if (e.kind == EventKind::Gather &&
        solver.layouts()[static_cast<std::size_t>(e.level)].redistributed &&
        solver.layouts()[static_cast<std::size_t>(e.level)].procs.dims ==
            Dims::of(2, 2))
      ++gathers_at_takeover;
  CHECK(gathers_at_takeover == 4);
}

TEST_CASE("scattered pieces equal the coarse task values bitwise") {
  Setup s(32, 32);
  DistributedSolver solver(
      s.h,
      plan_for(s.h, ProcessorGrid(Dims::of(4, 4)),
               {ProcessorGrid(Dims::of(2, 2))}),
      SimOptions{});
  solver.set_problem(GridFunction::zeros(s.grid), s.b);
  solver.cycle();
  int takeover = -1;
  for (int l = 0; l < solver.num_levels(); ++l)
    if (solver.layouts()[static_cast<std::size_t>(l)].redistributed &&
        solver.layouts()[static_cast<std::size_t>(l)].procs.dims ==
            Dims::of(2, 2))
      takeover = l;
  REQUIRE(takeover >= 0);
  const auto& lay = solver.layouts()[static_cast<std::size_t>(takeover)];
  const std::int64_t pfx = lay.procs_above.dims[0];
  const std::int64_t rx = ceil_div(pfx, lay.procs.dims[0]);
  const std::int64_t ry = ceil_div(lay.procs_above.dims[1], lay.procs.dims[1]);
  for (std::int64_t dy = 0; dy < lay.procs_above.dims[1]; ++dy)
    for (std::int64_t dx = 0; dx < pfx; ++dx) {
      const int piece = static_cast<int>(dy * pfx + dx);
      const LocalExtent ext = solver.piece_extent(takeover, piece);
      const int owner = static_cast<int>((dy / ry) * lay.procs.dims[0] + dx / rx);
      for (std::int64_t j = ext.offset[1]; j < ext.offset[1] + ext.dims[1]; ++j)
        for (std::int64_t i = ext.offset[0]; i < ext.offset[0] + ext.dims[0];
             ++i)
          CHECK(solver.piece_value(takeover, piece, SimField::X, i, j) ==
                solver.rank_value(takeover, owner, SimField::X, i, j));
    }
}

TEST_CASE("redistributed cycles match the serial solver") {
  for (auto [nx, ny, px, py] :
       {std::array<std::int64_t, 4>{33, 33, 2, 2}, {33, 17, 4, 2}}) {
    Setup s(nx, ny);
    GridFunction xs = GridFunction::zeros(s.grid);
    CycleStats serial = run_vcycles(s.h, xs, s.b, 5);

    const ProcessorGrid procs(Dims::of(px, py));
    for (const RedistPath& plan :
         {optimal_plan(s.h, procs),
          plan_for(s.h, procs, {ProcessorGrid(Dims::of(1, 1))}),
          plan_for(s.h, procs, {})}) {
      for (RedistMode mode : {RedistMode::NonRedundant, RedistMode::Redundant}) {
        SimOptions opt;
        opt.mode = mode;
        DistributedRun run = run_vcycles_distributed(
            s.h, plan, GridFunction::zeros(s.grid), s.b, 5, opt);
        CHECK(max_rel_diff(xs, run.x) <= 1e-12);
        CHECK(run.reconciliation.ok);
      }
    }
  }
}

TEST_CASE("interleaved empty ranks still match the serial solver") {
  Setup s(9, 9);
  const ProcessorGrid procs(Dims::of(8, 8));  // one point per rank, then less
  GridFunction xs = GridFunction::zeros(s.grid);
  CycleStats serial = run_vcycles(s.h, xs, s.b, 4);
  DistributedRun run = run_vcycles_distributed(
      s.h, plan_for(s.h, procs, {}), GridFunction::zeros(s.grid), s.b, 4,
      SimOptions{});
  CHECK(max_rel_diff(xs, run.x) <= 1e-12);
  CHECK(run.reconciliation.ok);
}

TEST_CASE("zero right-hand side keeps a zero iterate but full event log") {
  Setup s(33, 33);
  const ProcessorGrid procs(Dims::of(2, 2));
  auto [x, log] = vcycle_redist(s.h, optimal_plan(s.h, procs),
                                GridFunction::zeros(s.grid),
                                GridFunction::zeros(s.grid), SimOptions{});
  CHECK(x.max_norm() == 0.0);
  CHECK(log.total_messages() > 0);
}

TEST_CASE("redundant and non-redundant modes agree bitwise") {
  Setup s(33, 33);
  const ProcessorGrid procs(Dims::of(4, 2));
  const RedistPath plan = optimal_plan(s.h, procs);
  SimOptions a, b;
  a.mode = RedistMode::NonRedundant;
  b.mode = RedistMode::Redundant;
  DistributedRun ra = run_vcycles_distributed(s.h, plan,
                                              GridFunction::zeros(s.grid), s.b,
                                              3, a);
  DistributedRun rb = run_vcycles_distributed(s.h, plan,
                                              GridFunction::zeros(s.grid), s.b,
                                              3, b);
  for (std::size_t k = 0; k < ra.x.values.size(); ++k)
    CHECK(ra.x.values[k] == rb.x.values[k]);
  bool a_has_scatter = false, b_has_allgather = false;
  for (const Event& e : ra.log.events)
    if (e.kind == EventKind::Scatter) a_has_scatter = true;
  for (const Event& e : rb.log.events) {
    CHECK(e.kind != EventKind::Scatter);
    if (e.kind == EventKind::Allgather) b_has_allgather = true;
  }
  CHECK(a_has_scatter);
  CHECK(b_has_allgather);
  CHECK(ra.reconciliation.ok);
  CHECK(rb.reconciliation.ok);
}

TEST_CASE("shuffled rank order changes nothing") {
  Setup s(33, 17);
  const ProcessorGrid procs(Dims::of(4, 2));
  const RedistPath plan = optimal_plan(s.h, procs);
  SimOptions plain;
  SimOptions shuffled;
  shuffled.shuffle_rank_order = true;
  shuffled.shuffle_seed = 12345;
  DistributedRun r1 = run_vcycles_distributed(
      s.h, plan, GridFunction::zeros(s.grid), s.b, 3, plain);
  DistributedRun r2 = run_vcycles_distributed(
      s.h, plan, GridFunction::zeros(s.grid), s.b, 3, shuffled);
  REQUIRE(r1.x.values.size() == r2.x.values.size());
  for (std::size_t k = 0; k < r1.x.values.size(); ++k)
    CHECK(r1.x.values[k] == r2.x.values[k]);
  CHECK(r1.log.total_messages() == r2.log.total_messages());
  CHECK(r1.log.total_bytes() == r2.log.total_bytes());
}

TEST_CASE("reconciliation flags an injected duplicate exchange") {
  Setup s(33, 33);
  const ProcessorGrid procs(Dims::of(2, 2));
  const RedistPath plan = optimal_plan(s.h, procs);
  SimOptions opt;
  opt.inject_extra_exchange_level = s.h.num_levels() - 1;
  DistributedRun run = run_vcycles_distributed(
      s.h, plan, GridFunction::zeros(s.grid), s.b, 2, opt);
  CHECK_FALSE(run.reconciliation.ok);
  for (const auto& mm : run.reconciliation.mismatches)
    CHECK(mm.level == s.h.num_levels() - 1);
  CHECK_FALSE(run.reconciliation.mismatches.empty());
}

TEST_CASE("event log exports aggregated CSV") {
  Setup s(17, 17);
  const ProcessorGrid procs(Dims::of(2, 1));
  DistributedRun run = run_vcycles_distributed(
      s.h, plan_for(s.h, procs, {}), GridFunction::zeros(s.grid), s.b, 1,
      SimOptions{});
  std::ostringstream os1, os2;
  run.log.write_csv(os1, s.h.num_levels());
  run.log.write_csv(os2, s.h.num_levels());
  CHECK(os1.str() == os2.str());
  CHECK(os1.str().rfind("level,kind,messages,bytes\n", 0) == 0);
  CHECK(os1.str().find("exchange") != std::string::npos);
}

TEST_CASE("event counters equal the sum over the event list") {
  Setup s(33, 33);
  const ProcessorGrid procs(Dims::of(4, 4));
  DistributedRun run = run_vcycles_distributed(
      s.h, optimal_plan(s.h, procs), GridFunction::zeros(s.grid), s.b, 2,
      SimOptions{});
  std::int64_t msgs = 0, bytes = 0;
  for (const Event& e : run.log.events) {
    CHECK(e.bytes >= 0);
    msgs += e.messages;
    bytes += e.bytes;
  }
  const auto per_level = run.log.per_level(s.h.num_levels());
  std::int64_t sum_m = 0, sum_b = 0;
  for (const auto& c : per_level) {
    sum_m += c.messages();
    sum_b += c.bytes();
  }
  CHECK(sum_m == msgs);
  CHECK(sum_b == bytes);
  CHECK(run.log.total_messages() == msgs);
  CHECK(run.log.total_bytes() == bytes);
}
