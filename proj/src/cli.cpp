#include "mgredist/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mgredist/sim.hpp"

namespace mgredist {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v, const char* spec = "%.6e") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_exact(double v) { return fmt(v, "%.17g"); }

ordered_json dims_json(const Dims& d) {
  ordered_json a = ordered_json::array();
  for (int k = 0; k < d.ndim; ++k) a.push_back(d[k]);
  return a;
}

ordered_json machine_json(const MachineParams& m) {
  ordered_json j;
  j["alpha_s"] = m.alpha;
  j["beta_s_per_byte"] = m.beta;
  j["gamma_s_per_flop"] = m.gamma;
  return j;
}

ordered_json breakdown_json(const CostBreakdown& cb) {
  ordered_json j;
  j["smooth_s"] = cb.smooth;
  j["residual_s"] = cb.residual;
  j["restrict_s"] = cb.restriction;
  j["interp_s"] = cb.interp;
  j["agglomerate_s"] = cb.agglomerate;
  j["cgsolve_s"] = cb.cgsolve;
  j["total_s"] = cb.total;
  j["messages"] = cb.messages;
  j["bytes"] = cb.bytes;
  return j;
}

GridFunction random_rhs(const GlobalGrid& g, std::uint64_t seed) {
  GridFunction b = GridFunction::zeros(g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (std::int64_t j = 1; j < g.dims[1] - 1; ++j)
    for (std::int64_t i = 1; i < g.dims[0] - 1; ++i) b.ref(i, j) = val(rng);
  return b;
}

}  // namespace

Dims parse_dims_arg(const std::string& s) {
  const auto x = s.find_first_of("xX");
  if (x == std::string::npos || x == 0 || x + 1 >= s.size())
    throw std::invalid_argument("expected WxH, got '" + s + "'");
  std::size_t p1 = 0, p2 = 0;
  const std::int64_t a = std::stoll(s.substr(0, x), &p1);
  const std::int64_t b = std::stoll(s.substr(x + 1), &p2);
  if (p1 != x || p2 != s.size() - x - 1)
    throw std::invalid_argument("expected WxH, got '" + s + "'");
  return Dims::of(a, b);
}

GlobalGrid RunConfig::resolve_grid() const {
  if (grid) return GlobalGrid(*grid);
  if (!local) throw std::invalid_argument("need --grid or --local");
  return GlobalGrid(Dims::of((*local)[0] * proc[0], (*local)[1] * proc[1]));
}

MachineParams RunConfig::machine() const {
  return machine_file.empty() ? MachineParams::blue_waters()
                              : MachineParams::from_file(machine_file);
}

PlanProblem RunConfig::plan_problem() const {
  PlanProblem p;
  p.fine = resolve_grid();
  p.procs = ProcessorGrid(proc);
  p.trigger = trigger;
  p.nu1 = nu1;
  p.nu2 = nu2;
  p.mode = mode;
  return p;
}

void RunConfig::validate() const {
  if (grid && local)
    throw std::invalid_argument("--grid and --local are mutually exclusive");
  if (!grid && !local)
    throw std::invalid_argument("one of --grid or --local is required");
  if (nu1 < 0 || nu2 < 0 || nu1 + nu2 == 0)
    throw std::invalid_argument("need nu1 + nu2 >= 1 with non-negative counts");
  if (cycles < 1) throw std::invalid_argument("cycles must be positive");
  if (trigger.min_extent < 1 || trigger.min_points < 1)
    throw std::invalid_argument("trigger thresholds must be positive");
  if (format != "table" && format != "json" && format != "csv")
    throw std::invalid_argument("format must be table, json or csv");
  if (rhs != "one" && rhs != "random")
    throw std::invalid_argument("rhs must be one or random");
  for (int d = 0; d < proc.ndim; ++d)
    if (proc[d] < 1) throw std::invalid_argument("processor counts must be >= 1");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file " + path);
  std::string line;
  while (std::getline(f, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (auto& c : line)
      if (c == '=') c = ' ';
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key >> value)) continue;
    if (key == "grid") cfg.grid = parse_dims_arg(value);
    else if (key == "local") cfg.local = parse_dims_arg(value);
    else if (key == "proc") cfg.proc = parse_dims_arg(value);
    else if (key == "machine") cfg.machine_file = value;
    else if (key == "mode")
      cfg.mode = value == "redundant" ? RedistMode::Redundant
                                      : RedistMode::NonRedundant;
    else if (key == "cycles") cfg.cycles = std::stoi(value);
    else if (key == "nu1") cfg.nu1 = std::stoi(value);
    else if (key == "nu2") cfg.nu2 = std::stoi(value);
    else if (key == "interp")
      cfg.interp = value == "bilinear" ? InterpMode::Bilinear
                                       : InterpMode::OperatorInduced;
    else if (key == "trigger-extent") cfg.trigger.min_extent = std::stoll(value);
    else if (key == "trigger-points") cfg.trigger.min_points = std::stoll(value);
    else if (key == "format") cfg.format = value;
    else if (key == "out") cfg.out_path = value;
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "anisotropy") cfg.anisotropy = std::stod(value);
    else if (key == "aspect") cfg.cell_aspect = std::stod(value);
    else if (key == "rhs") cfg.rhs = value;
    else if (key == "sim") cfg.simulate = value == "1" || value == "true";
    else if (key == "max-ranks-log2") cfg.bench_max_log2 = std::stoi(value);
    else throw std::invalid_argument("config file: unknown key '" + key + "'");
  }
}

// ---------------------------------------------------------------------------
// plan
// ---------------------------------------------------------------------------

int cmd_plan(const RunConfig& cfg, std::ostream& os) {
  cfg.validate();
  const PlanProblem prob = cfg.plan_problem();
  const MachineParams m = cfg.machine();
  const SearchGraph graph = build_search_space(prob);

  const auto& root = graph.nodes()[static_cast<std::size_t>(graph.root())];
  std::vector<std::pair<ProcessorGrid, Dims>> enumeration;
  GlobalGrid enum_grid;
  if (root.trigger_level >= 0) {
    enum_grid = graph.grids()[static_cast<std::size_t>(root.trigger_level)];
    for (const auto& cand : enumerate_coarse_grids(prob.procs, enum_grid))
      enumeration.emplace_back(cand, agglomerated_local(enum_grid, cand));
  }

  const auto [path, stats] = search_astar(graph, m);
  const CostBreakdown cb =
      t_vcycle(plan_layouts(prob.fine, path.takeovers(), prob.coarse_threshold),
               prob.nu1, prob.nu2, prob.mode, m);

  if (cfg.format == "json") {
    ordered_json j;
    j["grid"] = dims_json(prob.fine.dims);
    j["proc"] = dims_json(prob.procs.dims);
    j["mode"] = prob.mode == RedistMode::Redundant ? "redundant" : "nonredundant";
    j["nu1"] = prob.nu1;
    j["nu2"] = prob.nu2;
    j["trigger"] = {{"min_extent", prob.trigger.min_extent},
                    {"min_points", prob.trigger.min_points}};
    j["machine"] = machine_json(m);
    if (root.trigger_level >= 0) {
      ordered_json rows = ordered_json::array();
      for (const auto& [p, l] : enumeration)
        rows.push_back({{"proc", dims_json(p.dims)}, {"local", dims_json(l)}});
      j["enumeration"] = {{"at_grid", dims_json(enum_grid.dims)},
                          {"rows", rows}};
    }
    j["path"] = path.arrows();
    ordered_json states = ordered_json::array();
    for (const auto& s : path.states)
      states.push_back({{"proc", dims_json(s.proc.dims)},
                        {"grid", dims_json(s.grid.dims)},
                        {"level", s.depth}});
    j["states"] = states;
    ordered_json transitions = ordered_json::array();
    for (std::size_t k = 1; k < path.states.size(); ++k)
      transitions.push_back(
          {{"from", dims_json(path.states[k - 1].proc.dims)},
           {"to", dims_json(path.states[k].proc.dims)},
           {"at_grid", dims_json(path.states[k].grid.dims)},
           {"level", path.states[k].depth},
           {"agglomerate_s", path.transition_cost[k - 1]}});
    j["transitions"] = transitions;
    j["total_s"] = path.total;
    j["breakdown"] = breakdown_json(cb);
    j["search"] = {{"expanded_nodes", stats.expanded_nodes},
                   {"path_length", stats.path_length}};
    os << j.dump(2) << "\n";
    return 0;
  }

  if (cfg.format == "csv") {
    os << "field,value\n";
    os << "grid," << prob.fine.dims.str() << "\n";
    os << "proc," << prob.procs.dims.str() << "\n";
    os << "path,\"" << path.arrows() << "\"\n";
    os << "total_s," << fmt_exact(path.total) << "\n";
    os << "expanded_nodes," << stats.expanded_nodes << "\n";
    os << "path_length," << stats.path_length << "\n";
    return 0;
  }

  os << "plan: grid " << prob.fine.dims.str() << " on " << prob.procs.dims.str()
     << " ranks, "
     << (prob.mode == RedistMode::Redundant ? "redundant" : "non-redundant")
     << " redistribution\n";
  if (prob.procs.total() == 1) {
    os << "no redistribution needed: single rank\n";
  } else if (root.trigger_level < 0) {
    os << "no redistribution needed: coarsening ends above the trigger\n";
  } else {
    os << "first redistribution point: grid " << enum_grid.dims.str("x")
       << " (level " << root.trigger_level << ")\n";
    os << "  Redistribution    Agglomerated Local Problem\n";
    for (const auto& [p, l] : enumeration)
      os << "  " << p.dims.str(" x ") << std::string(18 - std::min<std::size_t>(16, p.dims.str(" x ").size()), ' ')
         << l.str(" x ") << "\n";
  }
  os << "optimal path: " << path.arrows() << "\n";
  os << "model V-cycle time: " << fmt(path.total) << " s\n";
  os << "breakdown: smooth " << fmt(cb.smooth) << "  residual "
     << fmt(cb.residual) << "  restrict " << fmt(cb.restriction) << "  interp "
     << fmt(cb.interp) << "  agglomerate " << fmt(cb.agglomerate)
     << "  cgsolve " << fmt(cb.cgsolve) << "\n";
  os << "transitions:\n";
  for (std::size_t k = 1; k < path.states.size(); ++k)
    os << "  level " << path.states[k].depth << " at grid "
       << path.states[k].grid.dims.str() << ": "
       << path.states[k - 1].proc.dims.str() << " -> "
       << path.states[k].proc.dims.str() << "  ("
       << fmt(path.transition_cost[k - 1]) << " s)\n";
  os << "search: expanded " << stats.expanded_nodes << " states, path length "
     << stats.path_length << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// paths
// ---------------------------------------------------------------------------

int cmd_paths(const RunConfig& cfg, std::istream& paths, std::ostream& os) {
  cfg.validate();
  const PlanProblem prob = cfg.plan_problem();
  const MachineParams m = cfg.machine();

  struct Row {
    std::string line;
    PathEval ev;
  };
  std::vector<Row> rows;
  std::string line;
  while (std::getline(paths, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = true;
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    if (blank) continue;
    Row row;
    row.line = line;
    try {
      const auto hops = parse_path_arrows(line, prob.procs);
      row.ev = evaluate_path(prob, hops, m);
    } catch (const std::exception& e) {
      row.ev.valid = false;
      row.ev.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  // rank the valid rows by total cost
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (rows[k].ev.valid) order.push_back(k);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a].ev.path.total < rows[b].ev.path.total;
  });
  std::vector<int> rank(rows.size(), -1);
  for (std::size_t r = 0; r < order.size(); ++r)
    rank[order[r]] = static_cast<int>(r) + 1;

  bool any_invalid = false;
  if (cfg.format == "json") {
    ordered_json arr = ordered_json::array();
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Row& row = rows[k];
      ordered_json j;
      j["index"] = k;
      j["path"] = row.ev.valid ? row.ev.path.arrows() : row.line;
      j["valid"] = row.ev.valid;
      if (row.ev.valid) {
        j["total_s"] = row.ev.path.total;
        j["rank"] = rank[k];
        j["breakdown"] = breakdown_json(row.ev.breakdown);
      } else {
        j["error"] = row.ev.error;
        any_invalid = true;
      }
      arr.push_back(j);
    }
    os << arr.dump(2) << "\n";
  } else {  // csv output is the native format here; "table" matches it
    os << "index,valid,rank,total_s,path,error\n";
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Row& row = rows[k];
      if (!row.ev.valid) any_invalid = true;
      os << k << ',' << (row.ev.valid ? 1 : 0) << ',';
      if (rank[k] > 0)
        os << rank[k];
      os << ',';
      if (row.ev.valid) os << fmt_exact(row.ev.path.total);
      os << ",\"" << (row.ev.valid ? row.ev.path.arrows() : row.line) << "\",";
      if (!row.ev.valid) os << '"' << row.ev.error << '"';
      os << "\n";
    }
  }
  return any_invalid ? 1 : 0;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

namespace {

bool diverged(const CycleStats& st) {
  int consecutive = 0;
  for (double f : st.factors) {
    consecutive = f >= 1.0 ? consecutive + 1 : 0;
    if (consecutive >= 3) return true;
  }
  return false;
}

}  // namespace

int cmd_solve(const RunConfig& cfg, std::ostream& os) {
  cfg.validate();
  const GlobalGrid g = cfg.resolve_grid();
  const DiffusionProblem prob =
      cfg.cell_aspect > 0.0
          ? DiffusionProblem::stretched(g, cfg.anisotropy, cfg.cell_aspect)
          : DiffusionProblem::unit_square(g, cfg.anisotropy);

  MGHierarchy h = build_hierarchy(discretize(prob), g, cfg.nu1, cfg.nu2,
                                  cfg.interp, 3);
  const GridFunction b =
      cfg.rhs == "random" ? random_rhs(g, cfg.seed) : discretize_rhs(prob);

  GridFunction x = GridFunction::zeros(g);
  const CycleStats st = run_vcycles(h, x, b, cfg.cycles);
  const bool bad = diverged(st);

  double sim_diff = 0.0;
  std::string sim_path;
  ReconcileReport rec;
  EventLog log;
  if (cfg.simulate) {
    const PlanProblem pp = cfg.plan_problem();
    const SearchGraph graph = build_search_space(pp);
    const auto [plan, stats] = search_astar(graph, cfg.machine());
    sim_path = plan.arrows();
    SimOptions opt;
    opt.mode = cfg.mode;
    const DistributedRun run = run_vcycles_distributed(
        h, plan, GridFunction::zeros(g), b, cfg.cycles, opt);
    rec = run.reconciliation;
    log = run.log;
    double scale = x.max_norm();
    for (std::size_t k = 0; k < x.values.size(); ++k)
      sim_diff = std::max(sim_diff, std::fabs(run.x.values[k] - x.values[k]));
    if (scale > 0.0) sim_diff /= scale;
  }

  if (cfg.format == "json") {
    ordered_json j;
    j["grid"] = dims_json(g.dims);
    j["anisotropy"] = prob.anisotropy;
    j["cell_aspect"] = prob.cell_aspect;
    j["nu1"] = cfg.nu1;
    j["nu2"] = cfg.nu2;
    j["cycles"] = cfg.cycles;
    j["interp_fallbacks"] = h.interp_fallbacks();
    j["residual_l2"] = st.residual_norms;
    j["factors"] = st.factors;
    j["diverged"] = bad;
    if (cfg.simulate) {
      j["sim"] = {{"path", sim_path},
                  {"max_rel_diff", sim_diff},
                  {"reconciled", rec.ok},
                  {"messages", log.total_messages()},
                  {"bytes", log.total_bytes()}};
    }
    os << j.dump(2) << "\n";
  } else if (cfg.format == "csv") {
    os << "cycle,residual_l2,factor\n";
    for (std::size_t k = 0; k < st.residual_norms.size(); ++k) {
      os << k << ',' << fmt_exact(st.residual_norms[k]) << ',';
      if (k > 0) os << fmt_exact(st.factors[k - 1]);
      os << "\n";
    }
  } else {
    os << "solve: grid " << g.dims.str() << ", anisotropy "
       << fmt(prob.anisotropy, "%.4g") << ", cell aspect "
       << fmt(prob.cell_aspect, "%.4g") << ", V(" << cfg.nu1 << "," << cfg.nu2
       << "), " << h.num_levels() << " levels\n";
    if (h.interp_fallbacks() > 0)
      os << "note: " << h.interp_fallbacks()
         << " degenerate interpolation rows fell back to bilinear\n";
    os << "cycle   residual_l2      factor\n";
    for (std::size_t k = 0; k < st.residual_norms.size(); ++k) {
      os << "  " << k << "     " << fmt(st.residual_norms[k]);
      if (k > 0) os << "   " << fmt(st.factors[k - 1], "%.4f");
      os << "\n";
    }
    if (cfg.simulate) {
      os << "simulated plan: " << sim_path << "\n";
      os << "serial vs simulated max relative diff: " << fmt(sim_diff, "%.3e")
         << "\n";
      os << "events: " << log.total_messages() << " messages, "
         << log.total_bytes() << " bytes\n";
      os << rec.summary() << "\n";
    }
    if (bad) os << "DIVERGED: residual grew for three consecutive cycles\n";
  }
  if (bad) return 2;
  if (cfg.simulate && !rec.ok) return 3;
  return 0;
}

// ---------------------------------------------------------------------------
// search-bench
// ---------------------------------------------------------------------------

int cmd_search_bench(const RunConfig& cfg, std::ostream& os) {
  if (cfg.bench_max_log2 < 0 || cfg.bench_max_log2 > 20)
    throw std::invalid_argument("max-ranks-log2 out of range");
  const MachineParams m = cfg.machine();
  os << "h,ranks,proc,brute_paths,astar_expanded,astar_matches_brute\n";
  for (int hh = 0; hh <= cfg.bench_max_log2; ++hh) {
    PlanProblem prob;
    prob.trigger = cfg.trigger;
    prob.nu1 = cfg.nu1;
    prob.nu2 = cfg.nu2;
    prob.mode = cfg.mode;
    if (cfg.local) {
      // weak scaling with the configured per-rank size, 2:1-ish rank grid
      const std::int64_t px = std::int64_t{1} << ((hh + 1) / 2);
      const std::int64_t py = std::int64_t{1} << (hh / 2);
      prob.procs = ProcessorGrid(Dims::of(px, py));
      prob.fine = GlobalGrid(
          Dims::of((*cfg.local)[0] * px, (*cfg.local)[1] * py));
    } else {
      // wide family: every enumeration stays fully refinable
      const std::int64_t p = std::int64_t{1} << hh;
      prob.procs = ProcessorGrid(Dims::of(p, 1));
      prob.fine = GlobalGrid(Dims::of(3 * p, 6 * p));
    }
    const SearchGraph graph = build_search_space(prob);
    const auto [bp, bs] = search_brute(graph, m);
    const auto [ap, as] = search_astar(graph, m);
    os << hh << ',' << prob.procs.total() << ',' << prob.procs.dims.str() << ','
       << bs.expanded_nodes << ',' << as.expanded_nodes << ','
       << (ap.total == bp.total ? 1 : 0) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// wiring
// ---------------------------------------------------------------------------

int run_cli(int argc, char** argv) {
  CLI::App app{
      "mgredist: coarse-grid redistribution planning and simulated execution "
      "for structured multigrid"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string grid_s, local_s, proc_s, mode_s = "nonredundant",
                                       interp_s = "operator", config_file,
                                       paths_file;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--grid", grid_s, "global grid points, e.g. 9088x568");
    sub->add_option("--local", local_s,
                    "per-rank grid points (weak scaling: global = local * proc)");
    sub->add_option("--proc", proc_s, "processor grid, e.g. 16x8");
    sub->add_option("--machine", cfg.machine_file,
                    "machine parameter file (default: built-in Blue Waters)");
    sub->add_option("--mode", mode_s, "redundant | nonredundant");
    sub->add_option("--cycles", cfg.cycles, "V-cycles to run");
    sub->add_option("--nu1", cfg.nu1, "pre-smoothing sweeps");
    sub->add_option("--nu2", cfg.nu2, "post-smoothing sweeps");
    sub->add_option("--interp", interp_s, "bilinear | operator");
    sub->add_option("--trigger-extent", cfg.trigger.min_extent,
                    "redistribute when a local extent drops below this");
    sub->add_option("--trigger-points", cfg.trigger.min_points,
                    "redistribute when the local point count drops below this");
    sub->add_option("--format", cfg.format, "table | json | csv");
    sub->add_option("--out", cfg.out_path, "write output to a file");
    sub->add_option("--seed", cfg.seed, "seed for the random right-hand side");
    sub->add_option("--anisotropy", cfg.anisotropy,
                    "diffusion anisotropy ratio r in diag(1/r, r)");
    sub->add_option("--aspect", cfg.cell_aspect,
                    "cell aspect h_y/h_x (default: unit-square mesh)");
    sub->add_option("--rhs", cfg.rhs, "one | random");
    sub->add_option("--config", config_file,
                    "config file; its settings take precedence over flags");
  };

  CLI::App* plan = app.add_subcommand(
      "plan", "enumerate redistributions and search for the optimal path");
  add_common(plan);
  CLI::App* paths = app.add_subcommand(
      "paths", "evaluate and rank explicit redistribution paths");
  add_common(paths);
  paths->add_option("file", paths_file, "file with one arrow path per line")
      ->required();
  CLI::App* solve =
      app.add_subcommand("solve", "run V-cycles on the diffusion problem");
  add_common(solve);
  solve->add_flag("--sim", cfg.simulate,
                  "also execute the plan over logical ranks and reconcile");
  CLI::App* bench = app.add_subcommand(
      "search-bench", "sweep rank counts and record search statistics");
  add_common(bench);
  bench->add_option("--max-ranks-log2", cfg.bench_max_log2,
                    "largest log2 rank count in the sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (!grid_s.empty()) cfg.grid = parse_dims_arg(grid_s);
    if (!local_s.empty()) cfg.local = parse_dims_arg(local_s);
    if (!proc_s.empty()) cfg.proc = parse_dims_arg(proc_s);
    if (mode_s == "redundant")
      cfg.mode = RedistMode::Redundant;
    else if (mode_s == "nonredundant")
      cfg.mode = RedistMode::NonRedundant;
    else
      throw std::invalid_argument("mode must be redundant or nonredundant");
    if (interp_s == "bilinear")
      cfg.interp = InterpMode::Bilinear;
    else if (interp_s == "operator")
      cfg.interp = InterpMode::OperatorInduced;
    else
      throw std::invalid_argument("interp must be bilinear or operator");
    if (!config_file.empty()) apply_config_file(cfg, config_file);

    std::ofstream out_file;
    std::ostream* os = &std::cout;
    if (!cfg.out_path.empty()) {
      out_file.open(cfg.out_path);
      if (!out_file)
        throw std::invalid_argument("cannot open output file " + cfg.out_path);
      os = &out_file;
    }

    if (plan->parsed()) return cmd_plan(cfg, *os);
    if (paths->parsed()) {
      std::ifstream pf(paths_file);
      if (!pf)
        throw std::invalid_argument("cannot open paths file " + paths_file);
      return cmd_paths(cfg, pf, *os);
    }
    if (solve->parsed()) return cmd_solve(cfg, *os);
    if (bench->parsed()) return cmd_search_bench(cfg, *os);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mgredist
