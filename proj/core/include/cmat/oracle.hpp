#pragma once

#include <cmat/conflict_graph.hpp>
#include <cmat/milp_solver.hpp>
#include <cmat/parameters.hpp>

namespace cmat {

enum class ModelKind { m1, m2 };

/// Exhaustive ground truth for small graphs. Enumerates platoon sizes,
/// cycle candidates and arrival orderings, settling offsets through a
/// difference-constraint system; completely independent of the simplex
/// stack. Accepts at most 3 conflict nodes, and for m2 requires the
/// platoon cap to be at most 12 (keep c_bar small).
MilpSolution enumerate_oracle(const ConflictGraph& g, const DemandMap& demand,
                              const CmatParameters& params, ModelKind model);

}  // namespace cmat
