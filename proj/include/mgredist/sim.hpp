#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mgredist/mg.hpp"
#include "mgredist/perf_model.hpp"
#include "mgredist/redist.hpp"

/// @file sim.hpp
/// Logical-rank execution of the redistributed V-cycle inside one process.
/// Numerics reproduce the serial solver (same kernels over rank-local patches
/// with width-1 halos); every communication event is logged for
/// reconciliation against the model's count accounting.

namespace mgredist {

enum class EventKind { Exchange, Gather, Allgather, Scatter };

const char* to_string(EventKind k);

struct Event {
  int level = 0;
  EventKind kind = EventKind::Exchange;
  std::int64_t messages = 0;
  std::int64_t bytes = 0;
};

struct EventLog {
  std::vector<Event> events;

  void add(int level, EventKind kind, std::int64_t messages,
           std::int64_t bytes);
  /// Aggregated per-level counters (index = level, size = num_levels).
  std::vector<LevelCounts> per_level(int num_levels) const;
  /// "level,kind,messages,bytes" rows, aggregated, level-major.
  void write_csv(std::ostream& os, int num_levels) const;
  std::int64_t total_messages() const;
  std::int64_t total_bytes() const;
};

struct SimOptions {
  RedistMode mode = RedistMode::NonRedundant;
  /// Iterate ranks in a seeded shuffled order inside every phase; results
  /// must not change (checked by tests).
  bool shuffle_rank_order = false;
  std::uint64_t shuffle_seed = 1;
  /// Test hook: log every halo exchange at this level twice.
  int inject_extra_exchange_level = -1;
};

enum class SimField { X, B, R };

/// Executes the hierarchy over logical ranks following a redistribution plan.
/// Ranks run phase-locked: each parallel primitive is one loop over ranks
/// whose per-rank work reads only state written in earlier phases, so the
/// iteration order never matters.
class DistributedSolver {
 public:
  DistributedSolver(const MGHierarchy& h, const RedistPath& plan,
                    const SimOptions& opt);

  /// Distributes the global initial guess and right-hand side onto the
  /// fine-level ranks (fills interiors and halos; not a logged event).
  void set_problem(const GridFunction& x0, const GridFunction& b);

  /// One V(nu1, nu2) cycle with redistribution.
  void cycle();

  /// Assembles the fine-level iterate back into a global field.
  GridFunction assemble_x() const;

  const EventLog& log() const { return log_; }
  const std::vector<LevelLayout>& layouts() const { return layouts_; }
  int num_levels() const { return static_cast<int>(layouts_.size()); }

  /// Width-1 two-phase neighbor exchange of one field at one level (x sweep
  /// then y sweep carrying the corners).  Exposed for targeted tests.
  void halo_exchange(int level, SimField f);

  /// Block gathers of the restricted right-hand side at a redistributed
  /// level (gather in non-redundant mode, allgather in redundant mode).
  void gather_rhs(int level);

  /// Mirror of gather_rhs for the coarse solution; in redundant mode the
  /// copies are local to the redundant tasks and nothing is logged.
  void scatter_sol(int level);

  /// Direct read of a rank's stored value (interior or halo), for tests.
  double rank_value(int level, int rank_index, SimField f, std::int64_t gi,
                    std::int64_t gj) const;
  /// Same for a donor piece at a redistributed level.
  double piece_value(int level, int piece_index, SimField f, std::int64_t gi,
                     std::int64_t gj) const;
  LocalExtent piece_extent(int level, int piece_index) const;

 private:
  struct Patch {
    LocalExtent ext;
    std::int64_t stride = 0;
    std::vector<double> x, b, r;

    void allocate(const LocalExtent& e);
    std::size_t idx(std::int64_t gi, std::int64_t gj) const {
      return static_cast<std::size_t>((gj - ext.offset[1] + 1) * stride +
                                      (gi - ext.offset[0] + 1));
    }
    std::vector<double>& field(SimField f) {
      return f == SimField::X ? x : f == SimField::B ? b : r;
    }
    const std::vector<double>& field(SimField f) const {
      return f == SimField::X ? x : f == SimField::B ? b : r;
    }
  };

  struct Level {
    std::vector<Patch> ranks;   ///< layout-resident fields
    std::vector<Patch> pieces;  ///< donor-resident coarse pieces at takeovers
    std::vector<int> own_x, own_y;              ///< grid index -> owning rank
    std::vector<int> donor_own_x, donor_own_y;  ///< same for the donor layout
  };

  void relax_level(int level, int sweeps);
  void residual_level(int level);
  void restrict_level(int level);  // from `level` into level-1 storage
  void interp_level(int level);    // correction from level-1 into `level`
  void coarse_solve();
  void zero_x(int level);

  const MGHierarchy& h_;
  SimOptions opt_;
  std::vector<LevelLayout> layouts_;
  std::vector<Level> levels_;
  std::vector<std::vector<int>> order_;  ///< per-level rank visit order
  std::vector<std::vector<int>> piece_order_;
  EventLog log_;
};

/// One redistributed V-cycle over a fresh solver (the spec-level entry point;
/// use DistributedSolver directly for multi-cycle runs).
std::pair<GridFunction, EventLog> vcycle_redist(const MGHierarchy& h,
                                                const RedistPath& plan,
                                                const GridFunction& x0,
                                                const GridFunction& b,
                                                const SimOptions& opt);

struct ReconcileMismatch {
  int level = 0;
  std::string kind;
  std::string field;  // "messages" or "bytes"
  std::int64_t expected = 0;
  std::int64_t actual = 0;
};

struct ReconcileReport {
  bool ok = true;
  std::vector<ReconcileMismatch> mismatches;
  std::string summary() const;
};

/// Compares the run's event log with the model-implied per-level counts.
ReconcileReport reconcile(const EventLog& log,
                          const std::vector<LevelLayout>& layouts, int nu1,
                          int nu2, RedistMode mode, int cycles);

struct DistributedRun {
  GridFunction x;
  EventLog log;
  CycleStats stats;
  ReconcileReport reconciliation;
};

/// Runs `cycles` redistributed V-cycles, recording residual norms of the
/// assembled iterate and reconciling the event log.
DistributedRun run_vcycles_distributed(const MGHierarchy& h,
                                       const RedistPath& plan,
                                       const GridFunction& x0,
                                       const GridFunction& b, int cycles,
                                       const SimOptions& opt);

}  // namespace mgredist
