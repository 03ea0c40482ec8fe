#pragma once

#include <cmat/milp_instance.hpp>
#include <cmat/simplex.hpp>

#include <string>
#include <vector>

namespace cmat {

enum class MilpStatus { optimal, infeasible, limit_reached };

std::string to_string(MilpStatus s);

struct MilpSolveOptions {
  double feas_tol = 1e-6;
  double int_tol = 1e-6;
  double gap_tol = 1e-9;   ///< prune nodes within this of the incumbent
  long node_limit = 500000;
  double time_limit_s = 0.0;  ///< 0 disables the clock
  bool presolve = true;
  int strong_branch = 8;    ///< binary candidates probed per node, 0 disables
  long sb_pivot_cap = 300;  ///< pivot budget per strong-branch probe
  bool dive_heuristic = true;  ///< fix-and-propagate search for incumbents
  LpOptions lp;
};

struct MilpSolveStats {
  long nodes = 0;
  long lp_pivots = 0;
  double root_bound = 0.0;
  double runtime_s = 0.0;
};

struct MilpSolution {
  MilpStatus status = MilpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;  ///< empty when no feasible point was found
  MilpSolveStats stats;
};

/// Branch and bound over the bounded simplex. Depth-first dives with
/// best-bound backtracking; most-fractional branching, lowest index on ties.
/// An optional start point is used as the initial incumbent when it
/// satisfies the instance.
MilpSolution solve_milp(const MilpInstance& mi,
                        const MilpSolveOptions& opts = {},
                        const std::vector<double>* start = nullptr);

}  // namespace cmat
