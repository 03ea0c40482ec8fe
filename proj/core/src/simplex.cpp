#include <cmat/simplex.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmat {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SimplexSolver::SimplexSolver(const MilpInstance& mi, LpOptions opts)
    : opts_(opts) {
  n_struct_ = static_cast<int>(mi.variables().size());
  m_ = static_cast<int>(mi.rows().size());
  n_cols_ = n_struct_ + 2 * m_;
  cols_.assign(n_cols_, {});
  lb_.assign(n_cols_, 0.0);
  ub_.assign(n_cols_, 0.0);
  cost_.assign(n_cols_, 0.0);
  obj_const_ = mi.objective_constant;

  const auto& vars = mi.variables();
  const auto& obj = mi.objective();
  for (int j = 0; j < n_struct_; ++j) {
    lb_[j] = vars[j].lb;
    ub_[j] = vars[j].ub;
    cost_[j] = obj[j];
    if (!std::isfinite(lb_[j]) && !std::isfinite(ub_[j])) {
      throw std::invalid_argument("free variable not supported: " +
                                  vars[j].name);
    }
  }
  b_.assign(m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    const Row& row = mi.rows()[i];
    const double sgn = row.sense == RowSense::ge ? -1.0 : 1.0;
    b_[i] = sgn * row.rhs;
    for (const auto& t : row.terms) {
      cols_[t.var].push_back({i, sgn * t.coeff});
    }
    const int sj = n_struct_ + i;
    cols_[sj].push_back({i, 1.0});
    lb_[sj] = 0.0;
    ub_[sj] = row.sense == RowSense::eq ? 0.0 : kInf;
    const int aj = n_struct_ + m_ + i;
    cols_[aj].push_back({i, 1.0});
    lb_[aj] = 0.0;
    ub_[aj] = 0.0;
  }
  base_lb_ = lb_;
  base_ub_ = ub_;
  slot_of_.assign(n_cols_, -1);
  vstat_.assign(n_cols_, kAtLower);
  basic_.assign(m_, -1);
  x_basic_.assign(m_, 0.0);
}

void SimplexSolver::set_bound(int var, double lo, double hi) {
  lb_[var] = lo;
  ub_[var] = hi;
}

void SimplexSolver::reset_bounds() {
  lb_ = base_lb_;
  ub_ = base_ub_;
}

double SimplexSolver::nonbasic_value(int j) const {
  return vstat_[j] == kAtUpper ? ub_[j] : lb_[j];
}

double SimplexSolver::value(int col) const {
  const int s = slot_of_[col];
  return s >= 0 ? x_basic_[s] : nonbasic_value(col);
}

std::vector<double> SimplexSolver::structural_solution() const {
  std::vector<double> x(n_struct_);
  for (int j = 0; j < n_struct_; ++j) x[j] = value(j);
  return x;
}

double SimplexSolver::objective_value() const {
  double s = obj_const_;
  for (int j = 0; j < n_struct_; ++j) {
    if (cost_[j] != 0.0) s += cost_[j] * value(j);
  }
  return s;
}

// Exact Gauss-Jordan rebuild of the inverse; throws on a singular basis
// (callers recover by restarting from the crash basis).
void SimplexSolver::refactor() {
  const std::size_t mm = static_cast<std::size_t>(m_);
  std::vector<double> B(mm * mm, 0.0);
  for (int k = 0; k < m_; ++k) {
    for (const auto& e : cols_[basic_[k]]) {
      B[static_cast<std::size_t>(e.row) * mm + k] += e.coeff;
    }
  }
  std::vector<double> inv(mm * mm, 0.0);
  for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * mm + i] = 1.0;
  for (int c = 0; c < m_; ++c) {
    int prow = -1;
    double best = 1e-12;
    for (int r = c; r < m_; ++r) {
      const double v = std::abs(B[static_cast<std::size_t>(r) * mm + c]);
      if (v > best) {
        best = v;
        prow = r;
      }
    }
    if (prow < 0) throw std::runtime_error("singular basis");
    if (prow != c) {
      for (int k = 0; k < m_; ++k) {
        std::swap(B[static_cast<std::size_t>(prow) * mm + k],
                  B[static_cast<std::size_t>(c) * mm + k]);
        std::swap(inv[static_cast<std::size_t>(prow) * mm + k],
                  inv[static_cast<std::size_t>(c) * mm + k]);
      }
    }
    double* bc = &B[static_cast<std::size_t>(c) * mm];
    double* ic = &inv[static_cast<std::size_t>(c) * mm];
    const double scale = 1.0 / bc[c];
    for (int k = 0; k < m_; ++k) {
      bc[k] *= scale;
      ic[k] *= scale;
    }
    for (int r = 0; r < m_; ++r) {
      if (r == c) continue;
      const double f = B[static_cast<std::size_t>(r) * mm + c];
      if (f == 0.0) continue;
      double* br = &B[static_cast<std::size_t>(r) * mm];
      double* ir = &inv[static_cast<std::size_t>(r) * mm];
      for (int k = 0; k < m_; ++k) {
        br[k] -= f * bc[k];
        ir[k] -= f * ic[k];
      }
    }
  }
  binv_ = std::move(inv);
  since_refactor_ = 0;
  factorized_ = true;
}

void SimplexSolver::compute_x_basic() {
  std::vector<double> rhs = b_;
  for (int j = 0; j < n_cols_; ++j) {
    if (slot_of_[j] >= 0) continue;
    const double v = nonbasic_value(j);
    if (v == 0.0) continue;
    for (const auto& e : cols_[j]) rhs[e.row] -= e.coeff * v;
  }
  for (int i = 0; i < m_; ++i) {
    const double* row = &binv_[static_cast<std::size_t>(i) * m_];
    double s = 0.0;
    for (int k = 0; k < m_; ++k) s += row[k] * rhs[k];
    x_basic_[i] = s;
  }
}

void SimplexSolver::ftran(int j, std::vector<double>& w) const {
  w.assign(m_, 0.0);
  for (const auto& e : cols_[j]) {
    const double a = e.coeff;
    const int r = e.row;
    for (int i = 0; i < m_; ++i) {
      w[i] += a * binv_[static_cast<std::size_t>(i) * m_ + r];
    }
  }
}

void SimplexSolver::compute_duals(const std::vector<double>& cost,
                                  std::vector<double>& y,
                                  std::vector<double>& d) const {
  y.assign(m_, 0.0);
  for (int k = 0; k < m_; ++k) {
    const double c = cost[basic_[k]];
    if (c == 0.0) continue;
    const double* row = &binv_[static_cast<std::size_t>(k) * m_];
    for (int i = 0; i < m_; ++i) y[i] += c * row[i];
  }
  d.assign(n_cols_, 0.0);
  for (int j = 0; j < n_cols_; ++j) {
    if (slot_of_[j] >= 0) continue;
    double s = cost[j];
    for (const auto& e : cols_[j]) s -= y[e.row] * e.coeff;
    d[j] = s;
  }
}

void SimplexSolver::pivot(int entering, int slot, const std::vector<double>& w) {
  const double piv = w[slot];
  double* prow = &binv_[static_cast<std::size_t>(slot) * m_];
  const double scale = 1.0 / piv;
  for (int k = 0; k < m_; ++k) prow[k] *= scale;
  for (int i = 0; i < m_; ++i) {
    if (i == slot) continue;
    const double f = w[i];
    if (f == 0.0) continue;
    double* irow = &binv_[static_cast<std::size_t>(i) * m_];
    for (int k = 0; k < m_; ++k) irow[k] -= f * prow[k];
  }
  const int leaving = basic_[slot];
  slot_of_[leaving] = -1;
  slot_of_[entering] = slot;
  basic_[slot] = entering;
  vstat_[entering] = kBasic;
  ++since_refactor_;
  ++pivots_call_;
  ++pivots_total_;
}

LpStatus SimplexSolver::primal_iterate(const std::vector<double>& cost,
                                       long limit, bool force_bland) {
  std::vector<double> y, d, w;
  long degen_streak = 0;
  for (;;) {
    if (pivots_call_ >= limit) return LpStatus::pivot_limit;
    if (since_refactor_ >= opts_.refactor_every) {
      refactor();
      compute_x_basic();
    }
    const bool bland = force_bland || pivots_call_ > 10L * (m_ + 8) ||
                       degen_streak > 2L * m_ + 16;
    compute_duals(cost, y, d);
    int enter = -1;
    double best = opts_.opt_tol;
    for (int j = 0; j < n_cols_; ++j) {
      if (slot_of_[j] >= 0 || lb_[j] == ub_[j]) continue;
      const double dj = d[j];
      const bool eligible = (vstat_[j] == kAtLower && dj < -opts_.opt_tol) ||
                            (vstat_[j] == kAtUpper && dj > opts_.opt_tol);
      if (!eligible) continue;
      if (bland) {
        enter = j;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        enter = j;
      }
    }
    if (enter < 0) {
      // re-price against an exact inverse before declaring optimal
      if (since_refactor_ >= 100) {
        refactor();
        compute_x_basic();
        continue;
      }
      return LpStatus::optimal;
    }
    const double sigma = vstat_[enter] == kAtLower ? 1.0 : -1.0;
    ftran(enter, w);

    // Harris two-pass ratio test: first find the loosest step within a
    // feas_tol relaxation of the bounds, then pick the numerically largest
    // pivot among rows whose strict limit fits under it.
    const double own = ub_[enter] - lb_[enter];
    double t_rel = own;
    for (int i = 0; i < m_; ++i) {
      const double v = sigma * w[i];
      const int bcol = basic_[i];
      double rel;
      if (v > opts_.pivot_tol) {
        if (!std::isfinite(lb_[bcol])) continue;
        rel = (x_basic_[i] - lb_[bcol] + opts_.feas_tol) / v;
      } else if (v < -opts_.pivot_tol) {
        if (!std::isfinite(ub_[bcol])) continue;
        rel = (x_basic_[i] - ub_[bcol] - opts_.feas_tol) / v;
      } else {
        continue;
      }
      if (rel < t_rel) t_rel = rel;
    }
    if (t_rel < 0.0) t_rel = 0.0;
    if (!std::isfinite(t_rel)) {
      if (since_refactor_ > 0) {
        refactor();
        compute_x_basic();
        continue;
      }
      return LpStatus::unbounded;
    }

    int slot = -1;
    bool leave_to_upper = false;
    double t = own;
    double best_w = 0.0;
    for (int i = 0; i < m_; ++i) {
      const double v = sigma * w[i];
      const int bcol = basic_[i];
      double limit_i;
      bool to_upper;
      if (v > opts_.pivot_tol) {
        if (!std::isfinite(lb_[bcol])) continue;
        limit_i = (x_basic_[i] - lb_[bcol]) / v;
        to_upper = false;
      } else if (v < -opts_.pivot_tol) {
        if (!std::isfinite(ub_[bcol])) continue;
        limit_i = (x_basic_[i] - ub_[bcol]) / v;
        to_upper = true;
      } else {
        continue;
      }
      if (limit_i < 0.0) limit_i = 0.0;
      if (limit_i > t_rel) continue;
      if (std::abs(w[i]) > best_w) {
        best_w = std::abs(w[i]);
        slot = i;
        t = limit_i;
        leave_to_upper = to_upper;
      }
    }
    const bool flip = (slot < 0 || own <= t_rel) && std::isfinite(own);
    if (!flip && slot < 0) {
      if (since_refactor_ > 0) {
        refactor();
        compute_x_basic();
        continue;
      }
      return LpStatus::pivot_limit;  // numerical dead end, should not happen
    }
    const double step = flip ? own : t;
    degen_streak = step <= 1e-11 ? degen_streak + 1 : 0;
    if (flip) {
      // bound flip: the entering variable hits its own opposite bound first
      for (int i = 0; i < m_; ++i) x_basic_[i] -= sigma * step * w[i];
      vstat_[enter] = vstat_[enter] == kAtLower ? kAtUpper : kAtLower;
      ++pivots_call_;
      ++pivots_total_;
      continue;
    }
    const int leaving = basic_[slot];
    const double enter_val = nonbasic_value(enter) + sigma * t;
    for (int i = 0; i < m_; ++i) x_basic_[i] -= sigma * t * w[i];
    pivot(enter, slot, w);
    vstat_[leaving] = leave_to_upper ? kAtUpper : kAtLower;
    x_basic_[slot] = enter_val;
  }
}

LpStatus SimplexSolver::dual_iterate(long limit) {
  std::vector<double> y, d, w;
  constexpr double kStablePivot = 1e-7;
  for (;;) {
    if (pivots_call_ >= limit) return LpStatus::pivot_limit;
    if (since_refactor_ >= opts_.refactor_every) {
      refactor();
      compute_x_basic();
    }
    const bool bland = pivots_call_ > 10L * (m_ + 8);

    int slot = -1;
    double worst = opts_.feas_tol;
    bool below = false;
    for (int i = 0; i < m_; ++i) {
      const int bcol = basic_[i];
      const double xv = x_basic_[i];
      const double v1 = lb_[bcol] - xv;
      const double v2 = xv - ub_[bcol];
      if (v1 > worst) {
        worst = v1;
        slot = i;
        below = true;
      }
      if (v2 > worst) {
        worst = v2;
        slot = i;
        below = false;
      }
    }
    if (slot < 0) {
      if (since_refactor_ >= 100) {
        refactor();
        compute_x_basic();
        continue;
      }
      return LpStatus::optimal;
    }

    compute_duals(cost_, y, d);
    const double* brow = &binv_[static_cast<std::size_t>(slot) * m_];
    const double dirsgn = below ? 1.0 : -1.0;
    int enter = -1;
    double best_alpha = 0.0;
    // prefer pivots of decent magnitude; fall back to the raw tolerance only
    // when nothing stable is available
    for (const double floor_tol : {kStablePivot, opts_.pivot_tol}) {
      double theta_rel = kInf;
      for (int j = 0; j < n_cols_; ++j) {
        if (slot_of_[j] >= 0 || lb_[j] == ub_[j]) continue;
        double alpha = 0.0;
        for (const auto& e : cols_[j]) alpha += brow[e.row] * e.coeff;
        const bool eligible = vstat_[j] == kAtLower
                                  ? alpha * dirsgn < -floor_tol
                                  : alpha * dirsgn > floor_tol;
        if (!eligible) continue;
        if (bland) {
          enter = j;
          best_alpha = alpha;
          break;
        }
        const double rel = (std::abs(d[j]) + 1e-7) / std::abs(alpha);
        if (rel < theta_rel) theta_rel = rel;
      }
      if (enter >= 0) break;  // Bland pick
      if (!std::isfinite(theta_rel)) continue;
      // second pass: largest pivot among candidates within the relaxed ratio
      double best_mag = 0.0;
      for (int j = 0; j < n_cols_; ++j) {
        if (slot_of_[j] >= 0 || lb_[j] == ub_[j]) continue;
        double alpha = 0.0;
        for (const auto& e : cols_[j]) alpha += brow[e.row] * e.coeff;
        const bool eligible = vstat_[j] == kAtLower
                                  ? alpha * dirsgn < -floor_tol
                                  : alpha * dirsgn > floor_tol;
        if (!eligible) continue;
        if (std::abs(d[j]) / std::abs(alpha) > theta_rel) continue;
        if (std::abs(alpha) > best_mag) {
          best_mag = std::abs(alpha);
          enter = j;
          best_alpha = alpha;
        }
      }
      if (enter >= 0) break;
    }
    if (enter < 0) {
      // only trust an infeasibility verdict from an exact inverse
      if (since_refactor_ > 0) {
        refactor();
        compute_x_basic();
        continue;
      }
      return LpStatus::infeasible;
    }

    ftran(enter, w);
    const double piv = w[slot];
    const bool stale = std::abs(piv) < kStablePivot ||
                       std::abs(piv - best_alpha) > 1e-6 * (1.0 + std::abs(best_alpha));
    if (stale && since_refactor_ > 0) {
      refactor();
      compute_x_basic();
      continue;
    }
    if (std::abs(piv) < opts_.pivot_tol) return LpStatus::pivot_limit;
    const int leaving = basic_[slot];
    const double target = below ? lb_[leaving] : ub_[leaving];
    const double dx = (x_basic_[slot] - target) / piv;
    const double enter_val = nonbasic_value(enter) + dx;
    for (int i = 0; i < m_; ++i) x_basic_[i] -= dx * w[i];
    pivot(enter, slot, w);
    vstat_[leaving] = below ? kAtLower : kAtUpper;
    x_basic_[slot] = enter_val;
  }
}

LpResult SimplexSolver::solve_primal() {
  // a singular refactorization aborts the attempt; restart from the crash
  // basis under Bland's rule, whose different pivot path usually avoids the
  // degenerate columns that caused it
  for (const bool force_bland : {false, true}) {
    try {
      return solve_primal_attempt(force_bland);
    } catch (const std::runtime_error&) {
      factorized_ = false;
    }
  }
  LpResult res;
  res.status = LpStatus::pivot_limit;
  res.pivots = pivots_call_;
  return res;
}

LpResult SimplexSolver::solve_primal_attempt(bool force_bland) {
  LpResult res;
  pivots_call_ = 0;
  for (int j = 0; j < n_cols_; ++j) slot_of_[j] = -1;
  for (int j = 0; j < n_struct_; ++j) {
    vstat_[j] = std::isfinite(lb_[j]) ? kAtLower : kAtUpper;
  }
  for (int i = 0; i < m_; ++i) {
    vstat_[n_struct_ + i] = kAtLower;
    const int aj = n_struct_ + m_ + i;
    lb_[aj] = 0.0;
    ub_[aj] = 0.0;
    vstat_[aj] = kAtLower;
  }

  std::vector<double> resid = b_;
  for (int j = 0; j < n_struct_; ++j) {
    const double v = nonbasic_value(j);
    if (v == 0.0) continue;
    for (const auto& e : cols_[j]) resid[e.row] -= e.coeff * v;
  }
  std::vector<double> phase1_cost(n_cols_, 0.0);
  bool need_phase1 = false;
  for (int i = 0; i < m_; ++i) {
    const int sj = n_struct_ + i;
    const int aj = n_struct_ + m_ + i;
    const double r = resid[i];
    if (r >= lb_[sj] - 1e-11 && r <= ub_[sj] + 1e-11) {
      basic_[i] = sj;
      slot_of_[sj] = i;
      vstat_[sj] = kBasic;
    } else {
      basic_[i] = aj;
      slot_of_[aj] = i;
      vstat_[aj] = kBasic;
      if (r > 0.0) {
        ub_[aj] = r;
        phase1_cost[aj] = 1.0;
      } else {
        lb_[aj] = r;
        phase1_cost[aj] = -1.0;
      }
      need_phase1 = true;
    }
    x_basic_[i] = r;
  }
  binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int i = 0; i < m_; ++i) {
    binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0;
  }
  factorized_ = true;
  since_refactor_ = 0;

  const long limit = opts_.pivot_limit > 0
                         ? opts_.pivot_limit
                         : 200L * (m_ + n_struct_) + 20000;

  if (need_phase1) {
    const LpStatus st = primal_iterate(phase1_cost, limit, force_bland);
    if (st == LpStatus::pivot_limit) {
      res.status = st;
      res.pivots = pivots_call_;
      return res;
    }
    double infeas = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (basic_[i] >= n_struct_ + m_) infeas += std::abs(x_basic_[i]);
    }
    for (int i = 0; i < m_; ++i) {
      const int aj = n_struct_ + m_ + i;
      if (slot_of_[aj] < 0) infeas += std::abs(nonbasic_value(aj));
    }
    if (infeas > 1e-6) {
      res.status = LpStatus::infeasible;
      res.pivots = pivots_call_;
      return res;
    }
    for (int i = 0; i < m_; ++i) {
      const int aj = n_struct_ + m_ + i;
      lb_[aj] = 0.0;
      ub_[aj] = 0.0;
      if (slot_of_[aj] < 0) vstat_[aj] = kAtLower;
    }
    // drive leftover basic artificials out with degenerate exchanges
    std::vector<double> w;
    for (int s = 0; s < m_; ++s) {
      if (basic_[s] < n_struct_ + m_) continue;
      const double* brow = &binv_[static_cast<std::size_t>(s) * m_];
      int bestj = -1;
      double besta = 1e-6;
      for (int j = 0; j < n_struct_ + m_; ++j) {
        if (slot_of_[j] >= 0) continue;
        double alpha = 0.0;
        for (const auto& e : cols_[j]) alpha += brow[e.row] * e.coeff;
        if (std::abs(alpha) > besta) {
          besta = std::abs(alpha);
          bestj = j;
        }
      }
      if (bestj < 0) continue;  // redundant row, keep the pinned artificial
      ftran(bestj, w);
      if (std::abs(w[s]) < opts_.pivot_tol) continue;
      const int leaving = basic_[s];
      const double dx = x_basic_[s] / w[s];
      const double enter_val = nonbasic_value(bestj) + dx;
      for (int i = 0; i < m_; ++i) x_basic_[i] -= dx * w[i];
      pivot(bestj, s, w);
      vstat_[leaving] = kAtLower;
      x_basic_[s] = enter_val;
    }
  }

  res.status = primal_iterate(cost_, limit, force_bland);
  res.pivots = pivots_call_;
  if (res.status == LpStatus::optimal) res.objective = objective_value();
  return res;
}

LpResult SimplexSolver::resolve_dual(long pivot_cap) {
  if (!factorized_) return solve_primal();
  try {
    pivots_call_ = 0;
    std::vector<double> y, d;
    compute_duals(cost_, y, d);
    for (int j = 0; j < n_cols_; ++j) {
      if (slot_of_[j] >= 0 || lb_[j] == ub_[j]) continue;
      if (vstat_[j] == kAtLower && d[j] < -1e-7) {
        if (!std::isfinite(ub_[j])) return solve_primal();
        vstat_[j] = kAtUpper;
      } else if (vstat_[j] == kAtUpper && d[j] > 1e-7) {
        if (!std::isfinite(lb_[j])) return solve_primal();
        vstat_[j] = kAtLower;
      }
    }
    compute_x_basic();

    LpResult res;
    const long limit = pivot_cap > 0 ? pivot_cap
                       : opts_.pivot_limit > 0
                           ? opts_.pivot_limit
                           : 200L * (m_ + n_struct_) + 20000;
    res.status = dual_iterate(limit);
    if (res.status == LpStatus::optimal) {
      // clean up any reduced-cost slack the warm start left behind
      res.status = primal_iterate(cost_, limit);
    }
    res.pivots = pivots_call_;
    if (res.status == LpStatus::optimal) res.objective = objective_value();
    return res;
  } catch (const std::runtime_error&) {
    // singular refactorization mid-resolve: discard the basis, go cold
    factorized_ = false;
    return solve_primal();
  }
}

}  // namespace cmat
