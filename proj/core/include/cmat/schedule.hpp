#pragma once

#include <cmat/conflict_graph.hpp>
#include <cmat/milp_model.hpp>
#include <cmat/milp_solver.hpp>
#include <cmat/parameters.hpp>

#include <map>
#include <string>
#include <vector>

namespace cmat {

/// Timing of one movement's phantom micro-signal within the cycle.
struct MovementTiming {
  double red = 0.0;        ///< accumulation window r_p, s
  double green = 0.0;      ///< release window g_p, red + green = cycle, s
  int platoon = 1;         ///< vehicles per platoon L_p
  double offset = 0.0;     ///< cycle anchor t_off_p, s
  double occupancy = 0.0;  ///< time T_p the platoon blocks one point, s
};

/// Passage pattern at one conflict point: `first` crosses first within a
/// rotation, tau_lead separates its rear from `second`'s head, tau_wrap
/// closes the rotation back to `first` one cycle later.
struct NodeTiming {
  std::string first;
  std::string second;
  double tau_lead = 0.0;
  double tau_wrap = 0.0;
  bool z = false;  ///< raw order bit: true when the id-lower movement leads
};

/// A periodic platoon program read out of a solved model. Arrival times are
/// absolute for cycle zero; adding any multiple of `cycle` gives the rest.
struct CyclicSchedule {
  double cycle = 0.0;
  std::map<std::string, MovementTiming> movements;
  std::map<std::string, NodeTiming> nodes;
  /// movement -> node -> head-of-platoon arrival, s.
  std::map<std::string, std::map<std::string, double>> arrivals;
  CmatParameters params;
};

/// One platoon's stay at a conflict point: head arrival through rear
/// departure of the last vehicle.
struct OccupancyInterval {
  double start = 0.0;
  double end = 0.0;
  std::string movement;
  int cycle = 0;  ///< cycle index m
};

/// Per-node occupancy intervals over k cycles, sorted by start time. Labels
/// alternate between the node's two movements.
struct OccupancyTimeline {
  int k_cycles = 0;
  std::map<std::string, std::vector<OccupancyInterval>> by_node;
};

OccupancyTimeline expand_timeline(const CyclicSchedule& s, int k_cycles);

struct SafetyViolation {
  std::string node;      ///< empty for per-movement entries
  std::string movement;  ///< offending movement (second of a close pair)
  std::string what;      ///< "clearance", "spacing", "alternation", "coverage"
  double value = 0.0;
  double required = 0.0;
  double at = 0.0;  ///< time of the offending boundary, s
};

struct SafetyReport {
  std::vector<SafetyViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Reads the schedule out of a solved model. Integer variables are rounded
/// to the nearest integer; every schedule invariant is re-checked against
/// the instance's graph and parameters before the result is returned.
/// Accepts the best feasible point of a budget-limited solve as well as an
/// optimum. Throws std::invalid_argument when the solution holds no feasible
/// point and std::logic_error when a schedule invariant fails.
CyclicSchedule extract_schedule(const MilpSolution& sol,
                                const ModelBuild& build,
                                const ConflictGraph& g);

/// Expands the occupancy timeline over k_cycles (>= 3) and reports every
/// violation of the crossing rules: consecutive platoons of different
/// movements must be tau_c apart rear-to-front, and vehicles inside a
/// platoon must follow at exactly tau_f + l/v_f front-to-front. Violations
/// are report entries, never errors.
SafetyReport verify_safety(const CyclicSchedule& s, const ConflictGraph& g,
                           int k_cycles = 5);

struct Prop1Result {
  bool holds = true;
  std::string movement;  ///< first offender, empty when the check holds
  double product = 0.0;  ///< cycle * q_p of the offender
};

/// Checks the resonance property of demand-coupled schedules: the cycle
/// must be a common multiple of every unmuted movement's arrival headway,
/// i.e. cycle * q_p lands on a positive integer (1e-6) for each of them.
Prop1Result check_prop1(const CyclicSchedule& s, const DemandMap& demands,
                        const CmatParameters& params);

}  // namespace cmat
