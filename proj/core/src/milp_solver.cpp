#include <cmat/milp_solver.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <queue>
#include <utility>

namespace cmat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Node {
  int parent = -1;
  int var = -1;
  double lb = 0.0;
  double ub = 0.0;
};

struct HeapItem {
  double bound;
  long seq;
  int node;
  bool operator>(const HeapItem& o) const {
    if (bound != o.bound) return bound > o.bound;
    return seq > o.seq;
  }
};

void round_integral(const MilpInstance& mi, std::vector<double>& lo,
                    std::vector<double>& hi) {
  const auto& vars = mi.variables();
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (vars[j].kind == VarKind::continuous) continue;
    lo[j] = std::ceil(lo[j] - 1e-9);
    hi[j] = std::floor(hi[j] + 1e-9);
  }
}

/// Interval propagation over the rows; false when a domain empties.
bool propagate_bounds(const MilpInstance& mi, std::vector<double>& lo,
                      std::vector<double>& hi) {
  const auto& vars = mi.variables();
  const int n = static_cast<int>(vars.size());
  lo.resize(n);
  hi.resize(n);
  for (int j = 0; j < n; ++j) {
    lo[j] = vars[j].lb;
    hi[j] = vars[j].ub;
  }
  round_integral(mi, lo, hi);

  for (int pass = 0; pass < 10; ++pass) {
    bool changed = false;
    for (const auto& row : mi.rows()) {
      double act_lo = 0.0, act_hi = 0.0;
      int inf_lo = 0, inf_hi = 0;
      for (const auto& t : row.terms) {
        const double tl = t.coeff >= 0 ? t.coeff * lo[t.var] : t.coeff * hi[t.var];
        const double th = t.coeff >= 0 ? t.coeff * hi[t.var] : t.coeff * lo[t.var];
        if (std::isfinite(tl)) act_lo += tl; else ++inf_lo;
        if (std::isfinite(th)) act_hi += th; else ++inf_hi;
      }
      const bool has_up = row.sense != RowSense::ge;
      const bool has_dn = row.sense != RowSense::le;
      for (const auto& t : row.terms) {
        const double c = t.coeff;
        if (c == 0.0) continue;
        const double tl = c >= 0 ? c * lo[t.var] : c * hi[t.var];
        const double th = c >= 0 ? c * hi[t.var] : c * lo[t.var];
        double nlo = lo[t.var], nhi = hi[t.var];
        if (has_up && (inf_lo == 0 || (inf_lo == 1 && !std::isfinite(tl)))) {
          const double rest = std::isfinite(tl) ? act_lo - tl : act_lo;
          const double cap = row.rhs - rest;
          if (c > 0) nhi = std::min(nhi, cap / c);
          else nlo = std::max(nlo, cap / c);
        }
        if (has_dn && (inf_hi == 0 || (inf_hi == 1 && !std::isfinite(th)))) {
          const double rest = std::isfinite(th) ? act_hi - th : act_hi;
          const double need = row.rhs - rest;
          if (c > 0) nlo = std::max(nlo, need / c);
          else nhi = std::min(nhi, need / c);
        }
        if (vars[t.var].kind != VarKind::continuous) {
          nlo = std::ceil(nlo - 1e-9);
          nhi = std::floor(nhi + 1e-9);
        }
        if (nlo > lo[t.var] + 1e-9) {
          lo[t.var] = nlo;
          changed = true;
        }
        if (nhi < hi[t.var] - 1e-9) {
          hi[t.var] = nhi;
          changed = true;
        }
        if (lo[t.var] > hi[t.var] + 1e-7) return false;
      }
    }
    if (!changed) break;
  }
  for (int j = 0; j < n; ++j) {
    if (lo[j] <= hi[j]) continue;
    if (vars[j].kind != VarKind::continuous || lo[j] > hi[j] + 1e-7) {
      return false;
    }
    lo[j] = hi[j] = 0.5 * (lo[j] + hi[j]);
  }
  return true;
}

}  // namespace

std::string to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::optimal: return "optimal";
    case MilpStatus::infeasible: return "infeasible";
    case MilpStatus::limit_reached: return "limit_reached";
  }
  return "unknown";
}

MilpSolution solve_milp(const MilpInstance& mi, const MilpSolveOptions& opts,
                        const std::vector<double>* start) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(clock::now() - t0).count();
  };

  MilpSolution out;
  const int n = static_cast<int>(mi.variables().size());
  std::vector<int> int_vars;
  for (int j = 0; j < n; ++j) {
    if (mi.variables()[j].kind != VarKind::continuous) int_vars.push_back(j);
  }

  std::vector<double> root_lo(n), root_hi(n);
  bool root_ok;
  if (opts.presolve) {
    root_ok = propagate_bounds(mi, root_lo, root_hi);
  } else {
    for (int j = 0; j < n; ++j) {
      root_lo[j] = mi.variables()[j].lb;
      root_hi[j] = mi.variables()[j].ub;
    }
    round_integral(mi, root_lo, root_hi);
    root_ok = true;
    for (int j = 0; j < n; ++j) {
      if (root_lo[j] > root_hi[j]) root_ok = false;
    }
  }
  if (!root_ok) {
    out.status = MilpStatus::infeasible;
    out.stats.runtime_s = elapsed();
    return out;
  }

  SimplexSolver sx(mi, opts.lp);
  auto apply_root = [&] {
    for (int j = 0; j < n; ++j) sx.set_bound(j, root_lo[j], root_hi[j]);
  };
  apply_root();

  double inc_obj = kInf;
  std::vector<double> inc_x;
  auto accept = [&](std::vector<double> x) {
    const double obj = eval_objective(mi, x);
    if (obj < inc_obj) {
      inc_obj = obj;
      inc_x = std::move(x);
      return true;
    }
    return false;
  };
  // Candidate integer points: round, verify, and if rounding broke a row,
  // re-solve the continuous part with the integers pinned.
  long dbg_leaves = 0, dbg_sat = 0, dbg_repair_ok = 0, dbg_repair_bad = 0,
       dbg_infeas = 0, dbg_dive_ok = 0, dbg_sb_pins = 0;

  // Fix-and-propagate dive: from the root bounds (plus any preset pins),
  // repeatedly pin a free integer to its rounding and re-solve, flipping to
  // the neighbor value when a pin kills the LP. Binaries are pinned before
  // general integers; `order` picks most-integral-first (0),
  // least-integral-first (1), or index order (2). Aborts once the LP bound
  // can no longer beat the incumbent. Leaves the working bounds dirty, so
  // callers must restore their own state afterwards.
  auto run_dive = [&](const std::vector<std::pair<int, double>>& preset,
                      int order) {
    apply_root();
    for (const auto& [j, v] : preset) sx.set_bound(j, v, v);
    LpResult dl = sx.resolve_dual();
    out.stats.lp_pivots += dl.pivots;
    if (dl.status != LpStatus::optimal) return false;
    std::vector<char> pinned(n, 0);
    for (const auto& [j, v] : preset) pinned[j] = 1;
    for (;;) {
      if (dl.objective >= inc_obj - opts.gap_tol) return false;
      int pick = -1;
      double pdist = order == 1 ? -1.0 : 2.0;
      bool pick_bin = false;
      for (int j : int_vars) {
        if (pinned[j]) continue;
        const double xv = sx.value(j);
        const double f = xv - std::floor(xv);
        const double dist = std::min(f, 1.0 - f);
        const bool bin = mi.variables()[j].kind == VarKind::binary;
        if (pick < 0) {
          pick = j;
          pick_bin = bin;
          pdist = dist;
          continue;
        }
        if (bin != pick_bin) {
          if (!bin) continue;
          pick_bin = true;
          pdist = dist;
          pick = j;
          continue;
        }
        if (order == 2) continue;  // keep the first (lowest index) candidate
        const bool better = order == 1 ? dist > pdist + 1e-15
                                       : dist < pdist - 1e-15;
        if (better) {
          pdist = dist;
          pick = j;
        }
      }
      if (pick < 0) break;
      const double lo = sx.lower_bound(pick), hi = sx.upper_bound(pick);
      const double xv = sx.value(pick);
      double v1 = std::min(std::max(std::round(xv), lo), hi);
      const double v2 = xv >= v1 ? v1 + 1.0 : v1 - 1.0;
      bool ok = false;
      for (const double v : {v1, v2}) {
        if (v < lo - 0.5 || v > hi + 0.5) continue;
        sx.set_bound(pick, v, v);
        dl = sx.resolve_dual();
        out.stats.lp_pivots += dl.pivots;
        if (dl.status == LpStatus::optimal) {
          ok = true;
          break;
        }
      }
      if (!ok) return false;
      pinned[pick] = 1;
    }
    auto x = sx.structural_solution();
    for (int j : int_vars) x[j] = std::round(x[j]);
    if (satisfies(mi, x, opts.feas_tol, opts.int_tol)) {
      ++dbg_dive_ok;
      return accept(std::move(x));
    }
    return false;
  };

  auto try_incumbent = [&](std::vector<double> x, bool allow_repair) {
    ++dbg_leaves;
    for (int j : int_vars) x[j] = std::round(x[j]);
    if (satisfies(mi, x, opts.feas_tol, opts.int_tol)) {
      ++dbg_sat;
      accept(std::move(x));
      return;
    }
    if (!allow_repair) return;
    for (int j : int_vars) sx.set_bound(j, x[j], x[j]);
    const LpResult rep = sx.resolve_dual();
    out.stats.lp_pivots += rep.pivots;
    bool repaired = false;
    if (rep.status == LpStatus::optimal) {
      auto x2 = sx.structural_solution();
      for (int j : int_vars) x2[j] = std::round(x2[j]);
      if (satisfies(mi, x2, opts.feas_tol, opts.int_tol)) {
        repaired = true;
        ++dbg_repair_ok;
        accept(std::move(x2));
      }
    }
    if (!repaired) {
      ++dbg_repair_bad;
      if (opts.dive_heuristic) {
        // soften: keep only the binary assignment and re-derive the integers
        std::vector<std::pair<int, double>> preset;
        for (int j : int_vars) {
          if (mi.variables()[j].kind == VarKind::binary) {
            preset.emplace_back(j, x[j]);
          }
        }
        run_dive(preset, 0);
      }
    }
  };

  if (start && start->size() == static_cast<std::size_t>(n)) {
    try_incumbent(*start, false);
  }

  LpResult lp = sx.solve_primal();
  out.stats.lp_pivots += lp.pivots;
  if (lp.status == LpStatus::optimal) out.stats.root_bound = lp.objective;

  if (opts.dive_heuristic && lp.status == LpStatus::optimal) {
    for (const int order : {0, 1, 2}) run_dive({}, order);
    if (!inc_x.empty()) {
      // 1-opt: retry the dive with each binary of the incumbent flipped
      std::vector<int> bins;
      for (int j : int_vars) {
        if (mi.variables()[j].kind == VarKind::binary) bins.push_back(j);
      }
      if (!bins.empty() && bins.size() <= 64) {
        const std::vector<double> base = inc_x;
        std::vector<std::pair<int, double>> preset(bins.size());
        for (const int b : bins) {
          if (opts.time_limit_s > 0.0 && elapsed() > 0.4 * opts.time_limit_s) {
            break;
          }
          for (std::size_t k = 0; k < bins.size(); ++k) {
            const int j = bins[k];
            preset[k] = {j, j == b ? 1.0 - base[j] : base[j]};
          }
          run_dive(preset, 0);
        }
      }
    }
    apply_root();
    lp = sx.resolve_dual();
    out.stats.lp_pivots += lp.pivots;
  }

  std::vector<Node> arena;
  std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>>
      heap;
  long seq = 0;
  int cur = -1;  // arena index describing the current bound state
  std::vector<int> chain;
  auto jump_to = [&](int idx) {
    apply_root();
    chain.clear();
    for (int u = idx; u >= 0; u = arena[u].parent) chain.push_back(u);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      const Node& nd = arena[*it];
      sx.set_bound(nd.var, nd.lb, nd.ub);
    }
  };

  bool aborted = false;
  long nodes = 0;
  for (;;) {
    ++nodes;
    if (nodes > opts.node_limit ||
        (opts.time_limit_s > 0.0 && elapsed() > opts.time_limit_s)) {
      aborted = true;
      break;
    }

    if (opts.dive_heuristic && lp.status == LpStatus::optimal &&
        !inc_x.empty() && nodes % 256 == 0) {
      // crossover dive: pin the binaries where this node's relaxation agrees
      // with the incumbent, search the rest
      std::vector<std::pair<int, double>> preset;
      for (int j : int_vars) {
        if (mi.variables()[j].kind != VarKind::binary) continue;
        if (std::abs(sx.value(j) - inc_x[j]) < 0.1) {
          preset.emplace_back(j, inc_x[j]);
        }
      }
      run_dive(preset, 0);
      jump_to(cur);
      lp = sx.resolve_dual();
      out.stats.lp_pivots += lp.pivots;
    }

    bool pruned = false;
    double bound = kInf;
    if (lp.status == LpStatus::infeasible) {
      ++dbg_infeas;
      pruned = true;
    } else if (lp.status == LpStatus::optimal) {
      bound = lp.objective;
      if (bound >= inc_obj - opts.gap_tol) pruned = true;
    } else {
      aborted = true;  // pivot limit; give up honestly
      break;
    }

    if (!pruned) {
      // gather fractional integers; binaries branch before general integers
      // because they gate the disjunctive rows, and once they are pinned the
      // rounding repair on the remaining integers almost always lands
      struct Cand {
        double dist;
        int var;
        double val;
      };
      std::vector<Cand> frac_bin, frac_int;
      for (int j : int_vars) {
        const double xv = sx.value(j);
        const double f = xv - std::floor(xv);
        const double dist = std::min(f, 1.0 - f);
        if (dist <= opts.int_tol) continue;
        (mi.variables()[j].kind == VarKind::binary ? frac_bin : frac_int)
            .push_back({dist, j, xv});
      }
      if (frac_bin.empty() && frac_int.empty()) {
        try_incumbent(sx.structural_solution(), true);
        pruned = true;
      } else {
        auto& pool = frac_bin.empty() ? frac_int : frac_bin;
        std::sort(pool.begin(), pool.end(), [](const Cand& a, const Cand& b) {
          return a.dist > b.dist || (a.dist == b.dist && a.var < b.var);
        });

        int chosen = pool.front().var;
        double chosen_val = pool.front().val;
        double ch_up = bound, ch_dn = bound;
        bool reduced = false;

        // strong branching: probe both sides of the leading candidates with a
        // capped dual re-solve; a dead side becomes an in-place tightening, a
        // pair of dead sides prunes the node, and otherwise the variable with
        // the best bound-movement product wins
        const int kmax =
            std::min(static_cast<int>(pool.size()), opts.strong_branch);
        double best_score = -1.0;
        for (int c = 0; c < kmax; ++c) {
          const int j = pool[c].var;
          const double xv = pool[c].val;
          const double lo = sx.lower_bound(j), hi = sx.upper_bound(j);
          const double fl = std::floor(xv);
          sx.set_bound(j, fl + 1.0, hi);
          const LpResult ru = sx.resolve_dual(opts.sb_pivot_cap);
          out.stats.lp_pivots += ru.pivots;
          sx.set_bound(j, lo, fl);
          const LpResult rd = sx.resolve_dual(opts.sb_pivot_cap);
          out.stats.lp_pivots += rd.pivots;
          sx.set_bound(j, lo, hi);
          const double bu =
              ru.status == LpStatus::optimal ? std::max(ru.objective, bound) : bound;
          const double bd =
              rd.status == LpStatus::optimal ? std::max(rd.objective, bound) : bound;
          const bool cut_u = ru.status == LpStatus::infeasible ||
                             bu >= inc_obj - opts.gap_tol;
          const bool cut_d = rd.status == LpStatus::infeasible ||
                             bd >= inc_obj - opts.gap_tol;
          if (cut_u && cut_d) {
            pruned = true;
            break;
          }
          if (cut_u || cut_d) {
            ++dbg_sb_pins;
            arena.push_back(cut_u ? Node{cur, j, lo, fl}
                                  : Node{cur, j, fl + 1.0, hi});
            cur = static_cast<int>(arena.size()) - 1;
            const Node& pin = arena.back();
            sx.set_bound(pin.var, pin.lb, pin.ub);
            lp = sx.resolve_dual();
            out.stats.lp_pivots += lp.pivots;
            reduced = true;
            break;
          }
          const double score = std::max(bu - bound, 1e-10) *
                               std::max(bd - bound, 1e-10);
          if (score > best_score * (1.0 + 1e-12)) {
            best_score = score;
            chosen = j;
            chosen_val = xv;
            ch_up = bu;
            ch_dn = bd;
          }
        }
        if (reduced) continue;  // re-evaluate the tightened node
        if (!pruned) {
          const double fl = std::floor(chosen_val);
          const double lo = sx.lower_bound(chosen),
                       hi = sx.upper_bound(chosen);
          const Node up{cur, chosen, fl + 1.0, hi};
          const Node dn{cur, chosen, lo, fl};
          bool dive_up;
          if (ch_up < ch_dn - 1e-12) {
            dive_up = true;
          } else if (ch_dn < ch_up - 1e-12) {
            dive_up = false;
          } else {
            dive_up = chosen_val - fl >= 0.5;
          }
          arena.push_back(dive_up ? dn : up);
          heap.push({dive_up ? ch_dn : ch_up, seq++,
                     static_cast<int>(arena.size()) - 1});
          arena.push_back(dive_up ? up : dn);
          cur = static_cast<int>(arena.size()) - 1;
          const Node& first = arena.back();
          sx.set_bound(first.var, first.lb, first.ub);
          lp = sx.resolve_dual();
          out.stats.lp_pivots += lp.pivots;
          continue;
        }
      }
    }

    int next = -1;
    while (!heap.empty()) {
      const HeapItem h = heap.top();
      heap.pop();
      if (h.bound < inc_obj - opts.gap_tol) {
        next = h.node;
        break;
      }
    }
    if (next < 0) break;
    jump_to(next);
    cur = next;
    lp = sx.resolve_dual();
    out.stats.lp_pivots += lp.pivots;
  }

  out.stats.nodes = nodes;
  if (std::getenv("CMAT_MILP_DEBUG")) {
    std::fprintf(stderr,
                 "[milp] nodes=%ld infeas=%ld leaves=%ld sat=%ld repair_ok=%ld "
                 "repair_bad=%ld dive_ok=%ld sb_pins=%ld inc=%.6f\n",
                 nodes, dbg_infeas, dbg_leaves, dbg_sat, dbg_repair_ok,
                 dbg_repair_bad, dbg_dive_ok, dbg_sb_pins, inc_obj);
  }

  if (aborted) {
    out.status = MilpStatus::limit_reached;
    if (!inc_x.empty()) {
      out.objective = inc_obj;
      out.x = inc_x;
    }
    out.stats.runtime_s = elapsed();
    return out;
  }
  if (inc_x.empty()) {
    out.status = MilpStatus::infeasible;
    out.stats.runtime_s = elapsed();
    return out;
  }

  // polish: with the winning integer assignment pinned, recompute the
  // continuous part to full LP accuracy
  apply_root();
  for (int j : int_vars) sx.set_bound(j, inc_x[j], inc_x[j]);
  const LpResult pol = sx.resolve_dual();
  out.stats.lp_pivots += pol.pivots;
  if (pol.status == LpStatus::optimal) {
    auto x = sx.structural_solution();
    for (int j : int_vars) x[j] = std::round(x[j]);
    if (satisfies(mi, x, opts.feas_tol, opts.int_tol)) {
      const double obj = eval_objective(mi, x);
      if (obj <= inc_obj + opts.gap_tol) {
        inc_obj = obj;
        inc_x = std::move(x);
      }
    }
  }

  out.status = MilpStatus::optimal;
  out.objective = eval_objective(mi, inc_x);
  out.x = std::move(inc_x);
  out.stats.runtime_s = elapsed();
  return out;
}

}  // namespace cmat
