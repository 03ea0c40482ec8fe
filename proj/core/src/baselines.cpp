#include <cmat/baselines.hpp>

#include <cmat/milp_model.hpp>
#include <cmat/milp_solver.hpp>

#include "order_search.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cmat {

namespace {

/// Movements that cross at least one conflict point homed at the
/// intersection, in id order.
std::vector<std::string> movements_at_intersection(
    const ConflictGraph& g, const std::string& intersection,
    const std::map<std::string, std::string>& home,
    const std::string& default_home) {
  std::vector<std::string> out;
  for (const auto& p : g.movements()) {
    for (const auto& n : p.nodes) {
      auto it = home.find(n);
      const std::string& h = it == home.end() ? default_home : it->second;
      if (h == intersection) {
        out.push_back(p.id);
        break;
      }
    }
  }
  return out;
}

}  // namespace

TscConfig default_tsc_config(const Scenario& s, const CmatParameters& params) {
  TscConfig cfg;
  cfg.staging = s.intersections;
  cfg.node_intersection = s.node_intersection;
  for (std::size_t i = 0; i < s.intersections.size(); ++i) {
    // downstream signals start their ring one link travel time later
    cfg.offsets[s.intersections[i].id] =
        i == 0 ? 0.0
               : s.geometry.intersection_spacing_m / params.flow.v_f;
  }
  return cfg;
}

std::vector<std::string> plan_issues(const SignalPlan& plan,
                                     const ConflictGraph& g) {
  std::vector<std::string> issues;
  if (plan.cycle <= 0.0) issues.push_back("cycle must be positive");
  std::map<std::string, std::string> home;
  for (const auto& ip : plan.intersections) {
    for (const auto& n : ip.nodes) home[n] = ip.id;
  }
  for (const auto& ip : plan.intersections) {
    double total = 0.0;
    for (const auto& ph : ip.phases) total += ph.green + ph.lost;
    if (std::abs(total - plan.cycle) > 1e-6) {
      issues.push_back("phase times at " + ip.id + " sum to " +
                       std::to_string(total) + ", not the cycle");
    }
    std::map<std::string, int> served;
    for (const auto& ph : ip.phases) {
      for (const auto& p : ph.movements) served[p] += 1;
      // crossing conflicts may not share a phase
      for (std::size_t a = 0; a < ph.movements.size(); ++a) {
        const auto* pa = g.find_movement(ph.movements[a]);
        if (!pa) {
          issues.push_back("unknown movement " + ph.movements[a] + " at " +
                           ip.id);
          continue;
        }
        for (std::size_t b = a + 1; b < ph.movements.size(); ++b) {
          const auto* pb = g.find_movement(ph.movements[b]);
          if (!pb) continue;
          for (const auto& n : pa->nodes) {
            if (std::find(pb->nodes.begin(), pb->nodes.end(), n) ==
                pb->nodes.end()) {
              continue;
            }
            auto it = home.find(n);
            if (it == home.end() || it->second != ip.id) continue;
            const auto* node = g.find_node(n);
            if (node && node->kind == NodeKind::crossing) {
              issues.push_back("phase at " + ip.id + " releases " + pa->id +
                               " and " + pb->id + " across " + n);
            }
          }
        }
      }
    }
    for (const auto& pid : movements_at_intersection(
             g, ip.id, home, plan.intersections.front().id)) {
      auto it = served.find(pid);
      if (it == served.end()) {
        issues.push_back(pid + " is never served at " + ip.id);
      } else if (it->second > 1) {
        issues.push_back(pid + " is served by several phases at " + ip.id);
      }
    }
  }
  return issues;
}

CyclicSchedule rc_schedule(const ConflictGraph& g,
                           const CmatParameters& params,
                           double time_limit_s) {
  // No demand: every movement is muted, platoon sizes collapse to one and
  // the objective reduces to minimizing the cycle.
  auto build = build_m2(g, {}, params);

  auto start = feasible_start(g, {}, params);
  if (start.ok) {
    // the construction sits at the clearance lower bound, so it is optimal
    MilpSolution sol;
    sol.status = MilpStatus::optimal;
    sol.objective = eval_objective(build.instance, start.x);
    sol.x = start.x;
    return extract_schedule(sol, build, g);
  }

  auto sol = detail::solve_rotation(g, params, build, time_limit_s);
  if (sol.x.empty()) {
    throw std::runtime_error("no unit-platoon schedule found: " +
                             start.detail);
  }
  return extract_schedule(sol, build, g);
}

SignalPlan webster_plan(const ConflictGraph& g, const DemandMap& demands,
                        const CmatParameters& params, const TscConfig& cfg) {
  if (cfg.staging.empty()) {
    throw std::invalid_argument("fixed-time staging is empty");
  }
  if (cfg.lost_per_phase < 0.0) {
    throw std::invalid_argument("lost time must be non-negative");
  }
  const double qmax = params.flow.q_max();

  // per-intersection flow-ratio sums and lost times
  std::vector<double> ratio_sums;
  std::vector<std::vector<double>> phase_ratios;
  double required_cycle = 0.0;
  for (const auto& tmpl : cfg.staging) {
    if (tmpl.phases.empty()) {
      throw std::invalid_argument("no phases at " + tmpl.id);
    }
    std::set<std::string> seen;
    double y_sum = 0.0;
    std::vector<double> ys;
    for (const auto& ph : tmpl.phases) {
      if (ph.movements.empty()) {
        throw std::invalid_argument("empty phase at " + tmpl.id);
      }
      double y = 0.0;
      for (const auto& pid : ph.movements) {
        if (!g.find_movement(pid)) {
          throw std::invalid_argument("unknown movement " + pid + " at " +
                                      tmpl.id);
        }
        if (!seen.insert(pid).second) {
          throw std::invalid_argument(pid + " appears twice at " + tmpl.id);
        }
        auto it = demands.find(pid);
        const double q = it == demands.end() ? 0.0 : std::max(it->second, 0.0);
        y = std::max(y, q / qmax);
      }
      ys.push_back(y);
      y_sum += y;
    }
    if (y_sum >= 1.0) {
      throw std::runtime_error("flow-ratio sum " + std::to_string(y_sum) +
                               " at " + tmpl.id +
                               " leaves no cycle long enough");
    }
    const double lost = cfg.lost_per_phase * static_cast<double>(ys.size());
    required_cycle =
        std::max(required_cycle, (1.5 * lost + 5.0) / (1.0 - y_sum));
    ratio_sums.push_back(y_sum);
    phase_ratios.push_back(std::move(ys));
  }

  SignalPlan plan;
  plan.params = params;
  plan.cycle = std::min(required_cycle, params.c_bar);

  for (std::size_t i = 0; i < cfg.staging.size(); ++i) {
    const auto& tmpl = cfg.staging[i];
    const double lost =
        cfg.lost_per_phase * static_cast<double>(tmpl.phases.size());
    if (plan.cycle <= lost) {
      throw std::runtime_error("cycle cap leaves no green time at " + tmpl.id);
    }
    IntersectionPlan ip;
    ip.id = tmpl.id;
    auto off = cfg.offsets.find(tmpl.id);
    ip.offset = off == cfg.offsets.end() ? 0.0 : off->second;
    const double spread = plan.cycle - lost;
    for (std::size_t k = 0; k < tmpl.phases.size(); ++k) {
      SignalPhase ph;
      ph.movements = tmpl.phases[k].movements;
      // zero total demand still deserves a plan: split greens evenly
      ph.green = ratio_sums[i] > 0.0
                     ? phase_ratios[i][k] / ratio_sums[i] * spread
                     : spread / static_cast<double>(tmpl.phases.size());
      ph.lost = cfg.lost_per_phase;
      ip.phases.push_back(std::move(ph));
    }
    plan.intersections.push_back(std::move(ip));
  }

  for (const auto& [node, inter] : cfg.node_intersection) {
    for (auto& ip : plan.intersections) {
      if (ip.id == inter) ip.nodes.push_back(node);
    }
  }
  if (plan.intersections.size() == 1 && plan.intersections[0].nodes.empty()) {
    for (const auto& n : g.nodes()) {
      plan.intersections[0].nodes.push_back(n.id);
    }
  }

  auto issues = plan_issues(plan, g);
  if (!issues.empty()) {
    throw std::invalid_argument("staging is not conflict-free: " +
                                issues.front());
  }
  return plan;
}

}  // namespace cmat
