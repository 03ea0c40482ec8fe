#pragma once

#include <cmat/baselines.hpp>
#include <cmat/milp_solver.hpp>
#include <cmat/schedule.hpp>
#include <cmat/schedule_io.hpp>
#include <cmat/simulator.hpp>

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cmat {

/// Which scheduling program produced a controller. Fixed-time and rotation
/// baselines report `none`.
enum class ModelUsed { m1, m2, none };

std::string to_string(ModelUsed m);

struct PlannerOptions {
  /// Branch-and-bound budget per pinned-cycle candidate whose ordering the
  /// offset search missed. Candidates the search does crack solve as LPs.
  double m1_grid_budget_s = 2.0;
  /// Budget for throughput-model and all-muted searches. These land on the
  /// best incumbent found in time; results are cached, so the cost is paid
  /// once per demand pattern, not once per load level.
  double m2_budget_s = 45.0;
};

struct PlanResult {
  CyclicSchedule schedule;
  ModelUsed model = ModelUsed::none;
};

/// Demand-to-schedule pipeline: the demand-coupled program first, the
/// throughput program when that is infeasible.
///
/// Single-conflict networks solve directly. Larger networks enumerate
/// candidate cycles C = k / q_ref (q_ref the largest unmuted rate), keep the
/// candidates where every unmuted movement's per-cycle arrivals C q_p land
/// on an integer, pin C and those platoon sizes, and dive for an ordering.
/// The objective lambda C - (1 - lambda) sum L increases in C whenever
/// sum q_p < lambda / (1 - lambda), so candidates are tried in ascending
/// order and the first feasible one is kept (the rare converse case scans
/// them all).
///
/// Not thread-safe: callers running sweeps concurrently use one planner per
/// sweep.
class CmatPlanner {
 public:
  CmatPlanner(ConflictGraph g, CmatParameters params, PlannerOptions opt = {});

  /// Throws std::runtime_error when neither program yields a schedule.
  PlanResult plan(const DemandMap& demands);

 private:
  std::optional<PlanResult> try_m1(const DemandMap& demands);
  PlanResult plan_m2(const DemandMap& demands);

  ConflictGraph g_;
  CmatParameters params_;
  PlannerOptions opt_;
  std::optional<CyclicSchedule> all_muted_m1_;
  std::map<std::set<std::string>, MilpSolution> m2_cache_;
};

/// One controller built for one demand level.
struct FactoryResult {
  Controller controller;
  ModelUsed model = ModelUsed::none;
};

using ControllerFactory = std::function<FactoryResult(const DemandMap&)>;

/// Cyclic-modulation factory around a shared CmatPlanner.
ControllerFactory cmat_factory(const ConflictGraph& g,
                               const CmatParameters& params,
                               PlannerOptions opt = {});

/// Rotation baseline; the schedule is demand-blind and built once.
ControllerFactory rc_factory(const ConflictGraph& g,
                             const CmatParameters& params,
                             double time_limit_s = 60.0);

/// Fixed-time baseline; replans per demand level and throws (recorded as a
/// row error) when the flow ratios leave no feasible cycle.
ControllerFactory tsc_factory(const ConflictGraph& g,
                              const CmatParameters& params, TscConfig cfg);

struct SweepRow {
  double beta = 0.0;
  SimMetrics metrics;
  double cycle = 0.0;                  ///< 0 when the row errored
  std::map<std::string, int> platoons; ///< empty for fixed-time rows
  ModelUsed model = ModelUsed::none;
  bool safety_ok = false;
  std::string error;                   ///< nonempty when this row failed

  bool ok() const { return error.empty(); }
};

/// Runs the factory across load levels and simulates each controller under
/// the scaled demand. Rows are independent: a failed level records its error
/// and the sweep moves on. Throws std::invalid_argument unless betas is
/// non-empty and ascending.
std::vector<SweepRow> capacity_sweep(const ControllerFactory& factory,
                                     const ConflictGraph& g,
                                     const DemandMap& base_demand,
                                     const std::vector<double>& betas,
                                     const SimConfig& cfg = {});

}  // namespace cmat
