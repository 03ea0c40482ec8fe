#include <cmat/sweep.hpp>

#include <cmat/milp_model.hpp>
#include <cmat/milp_solver.hpp>

#include "order_search.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

namespace cmat {
namespace {

bool usable(const MilpSolution& sol) {
  return !sol.x.empty() && (sol.status == MilpStatus::optimal ||
                            sol.status == MilpStatus::limit_reached);
}

void pin(MilpInstance& mi, const std::string& var, double value) {
  mi.add_row("pin_" + var, {{mi.index_of(var), 1.0}}, RowSense::eq, value);
}

// The throughput objective sees only the platoon total, so the search is
// free to hand back lopsided splits that starve a movement under finite
// demand. Re-split the total toward demand shares when any ordering fits the
// new split; the cycle stays free, so the swap never costs objective. Tight
// networks can reject every split but the solver's own, and that one stands.
MilpSolution rebalance_split(const ConflictGraph& g,
                             const CmatParameters& params,
                             const ModelBuild& build, const MilpSolution& sol,
                             const DemandMap& demands) {
  struct Share {
    std::string id;
    double rate = 0.0;  ///< demand, clamped to saturation flow
    double want = 0.0;  ///< real slot target under the current mix
    long got = 0;       ///< the solver's count
    long give = 0;      ///< the count under trial
  };
  const auto& mi = build.instance;
  std::vector<Share> shares;
  long total = 0;
  double rate_sum = 0.0;
  for (const auto& p : g.movements()) {
    if (build.muted.count(p.id)) continue;
    Share s;
    s.id = p.id;
    s.got = std::lround(sol.x[mi.index_of("L[" + p.id + "]")]);
    const auto it = demands.find(p.id);
    s.rate =
        it == demands.end() ? 0.0 : std::min(it->second, params.flow.q_max());
    total += s.got;
    rate_sum += s.rate;
    shares.push_back(std::move(s));
  }
  if (shares.size() < 2 || rate_sum <= 0.0) return sol;

  const long lmax = params.l_max();

  // largest-remainder rounding of a proportional/solver mix, spare slots to
  // the biggest shortfalls
  auto settle = [&](double bias) -> bool {
    for (auto& s : shares) {
      const double slots = static_cast<double>(total) * s.rate / rate_sum;
      s.want = bias * slots + (1.0 - bias) * static_cast<double>(s.got);
      s.give = std::clamp(static_cast<long>(std::floor(s.want)), 1L, lmax);
    }
    long spare = total;
    for (const auto& s : shares) spare -= s.give;
    while (spare != 0) {
      Share* pick = nullptr;
      for (auto& s : shares) {
        if (spare > 0 && s.give >= lmax) continue;
        if (spare < 0 && s.give <= 1) continue;
        const double gap = s.want - static_cast<double>(s.give);
        if (!pick || (spare > 0 ? gap > pick->want - double(pick->give)
                                : gap < pick->want - double(pick->give))) {
          pick = &s;
        }
      }
      if (!pick) return false;
      pick->give += spare > 0 ? 1 : -1;
      spare += spare > 0 ? -1 : 1;
    }
    return true;
  };

  auto pin_and_solve = [&](ModelBuild& trial) {
    for (const auto& s : shares) {
      pin(trial.instance, "L[" + s.id + "]", static_cast<double>(s.give));
    }
    MilpSolveOptions opts;
    opts.gap_tol = 1e-9;
    return solve_milp(trial.instance, opts);
  };

  const double cycle = sol.x[mi.index_of("C")];
  const double sat = params.flow.saturation_headway();
  for (double bias : {1.0, 0.5}) {
    if (!settle(bias)) continue;
    bool moved = false;
    for (const auto& s : shares) moved = moved || s.give != s.got;
    if (!moved) return sol;

    // first under the ordering the solver chose
    {
      ModelBuild trial = build;
      for (const auto& n : g.nodes()) {
        pin(trial.instance, "z[" + n.id + "]",
            sol.x[mi.index_of("z[" + n.id + "]")] >= 0.5 ? 1.0 : 0.0);
      }
      auto fixed = pin_and_solve(trial);
      if (fixed.status == MilpStatus::optimal) return fixed;
    }
    // then under any fresh ordering that makes room for the new widths
    std::map<std::string, double> occupancy;
    for (const auto& p : g.movements()) {
      occupancy.emplace(p.id, params.flow.body_time());
    }
    for (const auto& s : shares) {
      occupancy[s.id] = sat * static_cast<double>(s.give) - params.flow.tau_f;
    }
    if (auto orders = detail::find_orders(g, params, occupancy, cycle, 29u)) {
      ModelBuild trial = build;
      for (const auto& [node, lead] : *orders) {
        pin(trial.instance, "z[" + node + "]", lead ? 1.0 : 0.0);
      }
      auto fixed = pin_and_solve(trial);
      if (fixed.status == MilpStatus::optimal) return fixed;
    }
  }
  return sol;
}

}  // namespace

std::string to_string(ModelUsed m) {
  switch (m) {
    case ModelUsed::m1:
      return "M1";
    case ModelUsed::m2:
      return "M2";
    default:
      return "n/a";
  }
}

CmatPlanner::CmatPlanner(ConflictGraph g, CmatParameters params,
                         PlannerOptions opt)
    : g_(std::move(g)), params_(params), opt_(opt) {}

PlanResult CmatPlanner::plan(const DemandMap& demands) {
  if (auto direct = try_m1(demands)) return *direct;
  return plan_m2(demands);
}

std::optional<PlanResult> CmatPlanner::try_m1(const DemandMap& demands) {
  if (g_.nodes().size() == 1) {
    auto build = build_m1(g_, demands, params_);
    auto sol = solve_milp(build.instance);
    if (sol.status != MilpStatus::optimal) return std::nullopt;
    return PlanResult{extract_schedule(sol, build, g_), ModelUsed::m1};
  }

  auto probe = build_m1(g_, demands, params_);
  const double qmax = params_.flow.q_max();
  std::map<std::string, double> qe;  // clamped rates, as the rows see them
  std::string ref;
  double qref = 0.0;
  for (const auto& p : g_.movements()) {
    double v = 0.0;
    if (auto it = demands.find(p.id); it != demands.end()) {
      v = std::min(std::max(it->second, 0.0), qmax);
    }
    qe.emplace(p.id, v);
    if (!probe.muted.count(p.id) && v > qref) {
      qref = v;
      ref = p.id;
    }
  }

  if (ref.empty()) {
    // every movement muted: no rate coupling left, the best schedule is the
    // same at every load, so solve once and reuse
    if (!all_muted_m1_) {
      auto sol = detail::solve_rotation(g_, params_, probe, opt_.m2_budget_s);
      if (!usable(sol)) return std::nullopt;
      all_muted_m1_ = extract_schedule(sol, probe, g_);
    }
    return PlanResult{*all_muted_m1_, ModelUsed::m1};
  }

  // first feasible candidate wins while the objective grows with C
  double unmuted_sum = 0.0;
  for (const auto& [pid, v] : qe) {
    if (!probe.muted.count(pid)) unmuted_sum += v;
  }
  const bool first_wins =
      params_.lambda - (1.0 - params_.lambda) * unmuted_sum > 0.0;

  const int lmax = params_.l_max();
  const auto kmax = static_cast<int>(std::floor(qref * params_.c_bar + 1e-9));
  std::optional<PlanResult> best;
  double best_objective = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    const double cycle = static_cast<double>(k) / qref;
    bool aligned = true;
    std::map<std::string, long> platoon;
    for (const auto& [pid, v] : qe) {
      if (probe.muted.count(pid)) continue;
      const double slots = cycle * v;
      const double nearest = std::round(slots);
      if (nearest < 1.0 || nearest > lmax ||
          std::abs(slots - nearest) > 1e-6) {
        aligned = false;
        break;
      }
      platoon.emplace(pid, std::lround(nearest));
    }
    if (!aligned) continue;

    // passage time per movement at this candidate's platoon sizes
    const double sat = params_.flow.saturation_headway();
    std::map<std::string, double> occupancy;
    for (const auto& p : g_.movements()) {
      const double count =
          probe.muted.count(p.id)
              ? 1.0
              : static_cast<double>(platoon.at(p.id));
      occupancy.emplace(p.id, sat * count - params_.flow.tau_f);
    }

    auto trial = build_m1(g_, demands, params_);
    pin(trial.instance, "C", cycle);
    for (const auto& [pid, L] : platoon) {
      pin(trial.instance, "L[" + pid + "]", static_cast<double>(L));
    }

    MilpSolution sol;
    auto orders = detail::find_orders(g_, params_, occupancy, cycle,
                                      static_cast<unsigned>(k) * 7919u + 3u);
    if (orders) {
      MilpSolveOptions opts;
      opts.gap_tol = 1e-9;
      sol = detail::solve_with_orders(trial, *orders, opts);
    } else {
      // no order found cheaply: give branch and bound a short shot
      MilpSolveOptions opts;
      opts.time_limit_s = opt_.m1_grid_budget_s;
      opts.gap_tol = 1e-6;
      sol = solve_milp(trial.instance, opts);
    }
    if (!usable(sol)) continue;
    PlanResult found{extract_schedule(sol, trial, g_), ModelUsed::m1};
    if (first_wins) return found;
    if (!best || sol.objective < best_objective) {
      best_objective = sol.objective;
      best = std::move(found);
    }
  }
  return best;
}

PlanResult CmatPlanner::plan_m2(const DemandMap& demands) {
  // the instance only sees demand through the muted set, so the expensive
  // search is shared across load levels and only the split is per-demand
  auto build = build_m2(g_, demands, params_);
  auto hit = m2_cache_.find(build.muted);
  if (hit == m2_cache_.end()) {
    // fix orders found at singleton widths and the widest cycle, pack
    // platoon sizes under them, then let the full search improve on that
    MilpSolution sol;
    std::map<std::string, double> occupancy;
    const double body = params_.flow.body_time();
    for (const auto& p : g_.movements()) occupancy.emplace(p.id, body);
    auto orders =
        detail::find_orders(g_, params_, occupancy, params_.c_bar, 11u);
    if (orders) {
      auto pinned = build;
      MilpSolveOptions opts;
      opts.time_limit_s = opt_.m2_budget_s / 2.0;
      opts.gap_tol = 1e-6;
      sol = detail::solve_with_orders(pinned, *orders, opts);
    }
    {
      MilpSolveOptions opts;
      opts.time_limit_s =
          usable(sol) ? opt_.m2_budget_s / 2.0 : opt_.m2_budget_s;
      opts.gap_tol = 1e-6;
      auto full =
          solve_milp(build.instance, opts, usable(sol) ? &sol.x : nullptr);
      if (usable(full) &&
          (!usable(sol) || full.objective < sol.objective - 1e-9)) {
        sol = std::move(full);
      }
    }
    if (!usable(sol)) {
      throw std::runtime_error(
          "throughput model found no feasible schedule within its budget");
    }
    hit = m2_cache_.emplace(build.muted, std::move(sol)).first;
  }
  auto balanced = rebalance_split(g_, params_, build, hit->second, demands);
  return PlanResult{extract_schedule(balanced, build, g_), ModelUsed::m2};
}

ControllerFactory cmat_factory(const ConflictGraph& g,
                               const CmatParameters& params,
                               PlannerOptions opt) {
  auto planner = std::make_shared<CmatPlanner>(g, params, opt);
  return [planner](const DemandMap& demands) {
    auto res = planner->plan(demands);
    return FactoryResult{std::move(res.schedule), res.model};
  };
}

ControllerFactory rc_factory(const ConflictGraph& g,
                             const CmatParameters& params,
                             double time_limit_s) {
  auto cache = std::make_shared<std::optional<CyclicSchedule>>();
  return [g, params, time_limit_s, cache](const DemandMap&) {
    if (!cache->has_value()) *cache = rc_schedule(g, params, time_limit_s);
    return FactoryResult{cache->value(), ModelUsed::none};
  };
}

ControllerFactory tsc_factory(const ConflictGraph& g,
                              const CmatParameters& params, TscConfig cfg) {
  return [g, params, cfg = std::move(cfg)](const DemandMap& demands) {
    return FactoryResult{webster_plan(g, demands, params, cfg),
                         ModelUsed::none};
  };
}

std::vector<SweepRow> capacity_sweep(const ControllerFactory& factory,
                                     const ConflictGraph& g,
                                     const DemandMap& base_demand,
                                     const std::vector<double>& betas,
                                     const SimConfig& cfg) {
  if (betas.empty()) {
    throw std::invalid_argument("capacity_sweep: betas must not be empty");
  }
  if (!std::is_sorted(betas.begin(), betas.end())) {
    throw std::invalid_argument("capacity_sweep: betas must ascend");
  }

  std::vector<SweepRow> rows;
  rows.reserve(betas.size());
  for (double beta : betas) {
    SweepRow row;
    row.beta = beta;
    DemandMap demands;
    for (const auto& [pid, q] : base_demand) demands.emplace(pid, q * beta);
    try {
      FactoryResult made = factory(demands);
      row.model = made.model;
      if (std::holds_alternative<CyclicSchedule>(made.controller)) {
        const auto& sched = std::get<CyclicSchedule>(made.controller);
        row.cycle = sched.cycle;
        for (const auto& [pid, t] : sched.movements) {
          row.platoons.emplace(pid, t.platoon);
        }
        row.safety_ok = verify_safety(sched, g).ok();
        row.metrics = simulate(sched, g, demands, cfg);
      } else {
        const auto& plan = std::get<SignalPlan>(made.controller);
        row.cycle = plan.cycle;
        row.safety_ok = plan_issues(plan, g).empty();
        row.metrics = simulate(plan, g, demands, cfg);
      }
    } catch (const std::exception& e) {
      row = SweepRow{};
      row.beta = beta;
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cmat
