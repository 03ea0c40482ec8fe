#pragma once

#include <cmat/conflict_graph.hpp>
#include <cmat/milp_instance.hpp>
#include <cmat/parameters.hpp>

#include <set>
#include <string>
#include <vector>

namespace cmat {

/// Movements whose demand is too thin to justify holding a platoon slot:
/// q_p = 0, or the mean inter-arrival time 1/q_p exceeds tau_star. Muted
/// movements keep a fixed platoon size of one.
std::set<std::string> muted_set(const ConflictGraph& g, const DemandMap& demand,
                                const CmatParameters& params);

/// A built scheduling program plus the bookkeeping callers need to read
/// solutions back out of it.
struct ModelBuild {
  MilpInstance instance;
  std::set<std::string> muted;
  std::vector<std::string> warnings;  ///< e.g. demand clamped to saturation
  CmatParameters params;              ///< snapshot used to build the rows
};

/// Demand-coupled variant: platoon sizes must match what arrives in a cycle
/// (L_p = q_p C for every unmuted movement), objective
/// lambda C - (1 - lambda) sum L.
ModelBuild build_m1(const ConflictGraph& g, const DemandMap& demand,
                    const CmatParameters& params);

/// Throughput variant: the service-rate coupling is dropped and the
/// objective flips to (1 - lambda) C - lambda sum L.
ModelBuild build_m2(const ConflictGraph& g, const DemandMap& demand,
                    const CmatParameters& params);

struct M2Precondition {
  bool ok = true;
  std::vector<std::string> failures;
  /// max{2 tau_c + 2 l / v_f, max_p 1/q_p}: the cycle length that the
  /// constructive feasibility argument needs.
  double min_cycle = 0.0;
};

/// Checks that the cycle cap leaves room for the constructive schedule
/// (c_bar >= min_cycle) and that muting is consistent with it
/// (tau_star <= min_cycle - 1/q_max).
M2Precondition check_m2_precondition(const ConflictGraph& g,
                                     const DemandMap& demand,
                                     const CmatParameters& params);

struct StartVector {
  bool ok = false;
  std::vector<double> x;  ///< aligned with build_m2(...).instance columns
  std::string detail;
};

/// Deterministic all-singleton schedule: L_p = 1, every crossing ordered
/// alphabetically, offsets solved from the headway equalities over a
/// spanning forest and verified against the full M2 row set. Fails (with
/// detail) when the precondition does not hold or the offset system is
/// inconsistent.
StartVector feasible_start(const ConflictGraph& g, const DemandMap& demand,
                           const CmatParameters& params);

}  // namespace cmat
