#pragma once

#include <cmat/milp_instance.hpp>

#include <cstdint>
#include <vector>

namespace cmat {

enum class LpStatus { optimal, infeasible, unbounded, pivot_limit };

struct LpOptions {
  double feas_tol = 1e-7;    ///< bound violation considered acceptable
  double opt_tol = 1e-9;     ///< reduced-cost threshold for entering
  double pivot_tol = 1e-9;   ///< smallest acceptable pivot magnitude
  int refactor_every = 250;  ///< pivots between inverse rebuilds
  long pivot_limit = 0;      ///< 0 picks a size-based default per call
};

struct LpResult {
  LpStatus status = LpStatus::pivot_limit;
  double objective = 0.0;
  long pivots = 0;
};

/// Bounded-variable revised simplex over a MilpInstance's LP relaxation.
/// Rows become equalities with one slack each (ge rows are negated), and a
/// dense explicit basis inverse is maintained with periodic refactorization.
/// Structural bounds are a working copy: branch and bound tightens them with
/// set_bound and re-solves warm via the dual method, the instance itself is
/// never touched.
class SimplexSolver {
 public:
  explicit SimplexSolver(const MilpInstance& mi, LpOptions opts = {});

  int num_structural() const { return n_struct_; }

  void set_bound(int var, double lo, double hi);
  void reset_bounds();
  double lower_bound(int var) const { return lb_[var]; }
  double upper_bound(int var) const { return ub_[var]; }

  /// Cold solve: slack/artificial crash basis, phase 1, then phase 2.
  LpResult solve_primal();

  /// Warm re-solve after bound changes, starting from the current basis.
  /// Falls back to a cold solve when no usable basis exists. A positive
  /// pivot_cap overrides the default pivot budget (used for cheap probing).
  LpResult resolve_dual(long pivot_cap = 0);

  double objective_value() const;
  double value(int col) const;
  std::vector<double> structural_solution() const;
  long total_pivots() const { return pivots_total_; }

 private:
  enum : std::uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2 };

  struct Entry {
    int row;
    double coeff;
  };

  double nonbasic_value(int j) const;
  void refactor();
  void compute_x_basic();
  void ftran(int j, std::vector<double>& w) const;
  void compute_duals(const std::vector<double>& cost, std::vector<double>& y,
                     std::vector<double>& d) const;
  void pivot(int entering, int slot, const std::vector<double>& w);
  LpStatus primal_iterate(const std::vector<double>& cost, long limit,
                          bool force_bland = false);
  LpStatus dual_iterate(long limit);
  LpResult solve_primal_attempt(bool force_bland);

  LpOptions opts_;
  int n_struct_ = 0;
  int m_ = 0;
  int n_cols_ = 0;  ///< structurals, then slacks, then artificials

  std::vector<std::vector<Entry>> cols_;
  std::vector<double> b_;
  std::vector<double> cost_;  ///< phase-2 objective
  std::vector<double> lb_, ub_;
  std::vector<double> base_lb_, base_ub_;
  double obj_const_ = 0.0;

  std::vector<int> basic_;          ///< column per basis slot
  std::vector<int> slot_of_;        ///< basis slot per column, -1 if nonbasic
  std::vector<std::uint8_t> vstat_;
  std::vector<double> binv_;  ///< row-major m x m
  std::vector<double> x_basic_;
  bool factorized_ = false;

  long pivots_total_ = 0;
  long pivots_call_ = 0;
  int since_refactor_ = 0;
};

}  // namespace cmat
