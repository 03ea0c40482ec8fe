#pragma once

#include <cmat/conflict_graph.hpp>
#include <cmat/milp_model.hpp>
#include <cmat/milp_solver.hpp>

#include <map>
#include <optional>
#include <string>

namespace cmat::detail {

/// Searches for a pass order per conflict point (node id -> does the
/// id-ordered first movement lead) that some offset assignment can realize
/// at the given cycle length, where `occupancy` holds each movement's
/// platoon passage time. Randomized repair over per-movement offsets;
/// deterministic for a fixed seed. Empty result means no order was found,
/// not a proof that none exists.
std::optional<std::map<std::string, bool>> find_orders(
    const ConflictGraph& g, const CmatParameters& params,
    const std::map<std::string, double>& occupancy, double cycle,
    unsigned seed, int restarts = 40, int steps = 2000);

/// Pins the z column for every node to the given order and solves what is
/// left. With platoon sizes pinned or fixed this is a plain LP.
MilpSolution solve_with_orders(ModelBuild& build,
                               const std::map<std::string, bool>& orders,
                               const MilpSolveOptions& opts = {});

/// All-singleton rotation: scans cycle lengths from the structural lower
/// bound upward until find_orders succeeds, then re-solves with the cycle
/// free so the ordering's own optimum is reported. Falls back to a budgeted
/// branch-and-bound search on the unmodified instance. `build` must hold an
/// all-singleton program (every platoon size fixed to one).
MilpSolution solve_rotation(const ConflictGraph& g,
                            const CmatParameters& params, ModelBuild& build,
                            double fallback_budget_s);

}  // namespace cmat::detail
