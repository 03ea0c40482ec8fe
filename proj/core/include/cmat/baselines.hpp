#pragma once

#include <cmat/conflict_graph.hpp>
#include <cmat/parameters.hpp>
#include <cmat/scenarios.hpp>
#include <cmat/schedule.hpp>

#include <map>
#include <string>
#include <vector>

namespace cmat {

struct SignalPhase {
  std::vector<std::string> movements;  ///< released together
  double green = 0.0;
  double lost = 0.0;  ///< change interval after the green, s
};

/// One signal head: a ring of phases walked in order, shifted by `offset`
/// against the shared cycle. `nodes` lists the conflict points it governs.
struct IntersectionPlan {
  std::string id;
  std::vector<SignalPhase> phases;
  double offset = 0.0;
  std::vector<std::string> nodes;
};

/// Fixed-time plan: one shared cycle, one phase ring per intersection.
struct SignalPlan {
  double cycle = 0.0;
  std::vector<IntersectionPlan> intersections;
  CmatParameters params;
};

/// Staging and geometry handed to webster_plan. default_tsc_config fills it
/// from a scenario template: 4 s lost per phase, downstream intersections
/// offset by the link travel time.
struct TscConfig {
  double lost_per_phase = 4.0;
  std::vector<IntersectionTemplate> staging;
  std::map<std::string, double> offsets;  ///< intersection id -> s
  std::map<std::string, std::string> node_intersection;
};

TscConfig default_tsc_config(const Scenario& s, const CmatParameters& params);

/// Checks a plan against the graph: phase times add up to the cycle at every
/// intersection, each movement crossing an intersection is served by exactly
/// one of its phases, and no phase releases two movements that share a
/// crossing conflict point there. Returns issues; empty means valid.
std::vector<std::string> plan_issues(const SignalPlan& plan,
                                     const ConflictGraph& g);

/// Unit-platoon cyclic schedule: every platoon pinned to one vehicle and the
/// cycle as short as the clearances allow. Built constructively when the
/// tight-headway offset system is consistent (single conflict point chains),
/// otherwise solved as the all-muted throughput model under a time budget,
/// keeping the best incumbent. Throws std::runtime_error when no feasible
/// unit-platoon schedule is found.
CyclicSchedule rc_schedule(const ConflictGraph& g,
                           const CmatParameters& params,
                           double time_limit_s = 20.0);

/// Webster minimum-cycle fixed-time plan over the configured staging:
/// cycle = (1.5 TL + 5) / (1 - Y) at the critical intersection, clamped to
/// c_bar; greens split in proportion to each phase's critical flow ratio.
/// Throws std::invalid_argument on a broken staging and std::runtime_error
/// when some flow-ratio sum reaches 1 (oversaturated, no feasible plan).
SignalPlan webster_plan(const ConflictGraph& g, const DemandMap& demands,
                        const CmatParameters& params, const TscConfig& cfg);

}  // namespace cmat
