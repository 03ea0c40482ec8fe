#include "order_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace cmat::detail {
namespace {

/// One conflict point as a disjunctive difference constraint on the two
/// movements' arrival offsets d = phi[b] - phi[a] + shift:
///   first movement leads:  d in [lead_lo, lead_hi]
///   second movement leads: d in [-wrap_hi, -wrap_lo]
struct Gap {
  int a = 0;
  int b = 0;
  double shift = 0.0;
  double lead_lo = 0.0;
  double lead_hi = 0.0;
  double wrap_lo = 0.0;
  double wrap_hi = 0.0;
};

double window_miss(double d, double lo, double hi) {
  if (d < lo) return lo - d;
  if (d > hi) return d - hi;
  return 0.0;
}

double gap_miss(const Gap& e, double d) {
  return std::min(window_miss(d, e.lead_lo, e.lead_hi),
                  window_miss(-d, e.wrap_lo, e.wrap_hi));
}

}  // namespace

std::optional<std::map<std::string, bool>> find_orders(
    const ConflictGraph& g, const CmatParameters& params,
    const std::map<std::string, double>& occupancy, double cycle,
    unsigned seed, int restarts, int steps) {
  const double tau_c = params.flow.tau_c;
  std::map<std::string, int> index;
  int nm = 0;
  for (const auto& p : g.movements()) index.emplace(p.id, nm++);

  std::vector<Gap> gaps;
  std::vector<const ConflictNode*> nodes;
  for (const auto& n : g.nodes()) {
    auto pair = g.movements_at(n.id);
    const auto& pa = *pair[0];
    const auto& pb = *pair[1];
    const double ta = occupancy.at(pa.id);
    const double tb = occupancy.at(pb.id);
    if (ta + tb + 2.0 * tau_c > cycle + 1e-9) return std::nullopt;
    Gap e;
    e.a = index.at(pa.id);
    e.b = index.at(pb.id);
    e.shift = travel_time(g, pb, n.id, params.flow.v_f) -
              travel_time(g, pa, n.id, params.flow.v_f);
    e.lead_lo = ta + tau_c;
    e.lead_hi = cycle - tb - tau_c;
    e.wrap_lo = tb + tau_c;
    e.wrap_hi = cycle - ta - tau_c;
    gaps.push_back(e);
    nodes.push_back(&n);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uphase(0.0, cycle);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> phi(static_cast<std::size_t>(nm), 0.0);
  std::vector<int> broken;

  for (int attempt = 0; attempt < restarts; ++attempt) {
    for (auto& v : phi) v = uphase(rng);
    for (int step = 0; step < steps; ++step) {
      broken.clear();
      for (std::size_t i = 0; i < gaps.size(); ++i) {
        const auto& e = gaps[i];
        if (gap_miss(e, phi[e.b] - phi[e.a] + e.shift) > 1e-9) {
          broken.push_back(static_cast<int>(i));
        }
      }
      if (broken.empty()) {
        std::map<std::string, bool> orders;
        for (std::size_t i = 0; i < gaps.size(); ++i) {
          const auto& e = gaps[i];
          const double d = phi[e.b] - phi[e.a] + e.shift;
          orders.emplace(nodes[i]->id,
                         window_miss(d, e.lead_lo, e.lead_hi) <= 1e-9);
        }
        return orders;
      }
      const auto& e = gaps[static_cast<std::size_t>(
          broken[rng() % broken.size()])];
      const double d = phi[e.b] - phi[e.a] + e.shift;
      // project the gap into one window: usually the nearer one, sometimes
      // the other to escape local traps; land at a random interior point
      bool lead = window_miss(d, e.lead_lo, e.lead_hi) <=
                  window_miss(-d, e.wrap_lo, e.wrap_hi);
      if (u01(rng) < 0.2) lead = !lead;
      double target;
      if (lead) {
        target = e.lead_lo + u01(rng) * (e.lead_hi - e.lead_lo);
      } else {
        target = -(e.wrap_lo + u01(rng) * (e.wrap_hi - e.wrap_lo));
      }
      if (rng() & 1U) {
        phi[e.b] = target - e.shift + phi[e.a];
      } else {
        phi[e.a] = phi[e.b] + e.shift - target;
      }
    }
  }
  return std::nullopt;
}

MilpSolution solve_with_orders(ModelBuild& build,
                               const std::map<std::string, bool>& orders,
                               const MilpSolveOptions& opts) {
  for (const auto& [node, first_leads] : orders) {
    build.instance.add_row("pin_z[" + node + "]",
                           {{build.instance.index_of("z[" + node + "]"), 1.0}},
                           RowSense::eq, first_leads ? 1.0 : 0.0);
  }
  return solve_milp(build.instance, opts);
}

MilpSolution solve_rotation(const ConflictGraph& g,
                            const CmatParameters& params, ModelBuild& build,
                            double fallback_budget_s) {
  const double body = params.flow.body_time();
  std::map<std::string, double> occupancy;
  for (const auto& p : g.movements()) occupancy.emplace(p.id, body);

  // two singleton passages and two clearances per conflict point
  const double floor_cycle = 2.0 * (body + params.flow.tau_c);

  auto try_cycle = [&](double cycle, unsigned seed) -> MilpSolution {
    auto orders = find_orders(g, params, occupancy, cycle, seed);
    if (!orders) return {};
    ModelBuild pinned = build;
    MilpSolveOptions opts;
    opts.gap_tol = 1e-9;
    return solve_with_orders(pinned, *orders, opts);
  };

  MilpSolution best;
  for (double cycle = floor_cycle; cycle <= params.c_bar + 1e-9;
       cycle += 0.25) {
    auto sol = try_cycle(cycle, static_cast<unsigned>(cycle * 16.0) + 1u);
    if (sol.status == MilpStatus::optimal) {
      best = std::move(sol);
      break;
    }
  }

  if (best.status == MilpStatus::optimal) {
    // polish: hunt for orderings that admit a shorter cycle than the one the
    // scan stopped at. The searched offsets stay feasible when the cycle is
    // freed, so every hit shortens the incumbent by at least one step.
    const auto c_col = build.instance.index_of("C");
    for (int round = 0; round < 64; ++round) {
      const double target = best.x[c_col] - 0.25;
      if (target < floor_cycle - 1e-9) break;
      MilpSolution sol;
      for (unsigned s = 0; s < 3 && sol.status != MilpStatus::optimal; ++s)
        sol = try_cycle(target,
                        static_cast<unsigned>(target * 16.0) + 101u + 7u * s);
      if (sol.status != MilpStatus::optimal) break;
      if (sol.x[c_col] > best.x[c_col] - 1e-9) break;
      best = std::move(sol);
    }
    return best;
  }

  MilpSolveOptions opts;
  opts.time_limit_s = fallback_budget_s;
  opts.gap_tol = 1e-6;
  return solve_milp(build.instance, opts);
}

}  // namespace cmat::detail
