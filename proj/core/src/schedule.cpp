#include <cmat/schedule.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmat {

namespace {

// Extraction re-checks what the solver already enforced, so the tolerance
// only needs to absorb solver feasibility slack plus integer rounding.
constexpr double kExtractTol = 5e-6;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::logic_error("schedule invariant failed: " + what);
}

}  // namespace

CyclicSchedule extract_schedule(const MilpSolution& sol,
                                const ModelBuild& build,
                                const ConflictGraph& g) {
  if (sol.status == MilpStatus::infeasible || sol.x.empty()) {
    throw std::invalid_argument(
        "schedule extraction needs a feasible point, solve returned " +
        to_string(sol.status));
  }
  const auto& mi = build.instance;
  if (sol.x.size() != mi.variables().size()) {
    throw std::invalid_argument("solution vector does not match the instance");
  }
  auto val = [&](const std::string& name) {
    return sol.x[static_cast<std::size_t>(mi.index_of(name))];
  };

  const auto& flow = build.params.flow;
  CyclicSchedule s;
  s.params = build.params;
  s.cycle = val("C");

  for (const auto& p : g.movements()) {
    MovementTiming t;
    t.red = val("r[" + p.id + "]");
    t.green = val("g[" + p.id + "]");
    t.platoon = static_cast<int>(std::llround(val("L[" + p.id + "]")));
    t.offset = val("toff[" + p.id + "]");
    t.occupancy = val("T[" + p.id + "]");

    require(t.platoon >= 1, "platoon size under 1 for " + p.id);
    require(std::abs(t.red + t.green - s.cycle) <= kExtractTol,
            "red + green != cycle for " + p.id);
    const double want =
        (t.platoon - 1) * flow.tau_f + t.platoon * flow.body_time();
    require(std::abs(t.occupancy - want) <= kExtractTol,
            "occupancy time off for " + p.id);

    for (const auto& n : p.nodes) {
      const double arr = val("tarr[" + p.id + "," + n + "]");
      const double travel = travel_time(g, p, n, flow.v_f);
      require(std::abs(arr - (t.offset + t.red + travel)) <= kExtractTol,
              "arrival at " + n + " off for " + p.id);
      s.arrivals[p.id][n] = arr;
    }
    s.movements.emplace(p.id, t);
  }

  for (const auto& n : g.nodes()) {
    const auto pair = g.movements_at(n.id);
    NodeTiming t;
    t.z = val("z[" + n.id + "]") > 0.5;
    t.first = t.z ? pair[0]->id : pair[1]->id;
    t.second = t.z ? pair[1]->id : pair[0]->id;
    t.tau_lead = val("tau1[" + n.id + "]");
    t.tau_wrap = val("tau2[" + n.id + "]");

    require(t.tau_lead >= flow.tau_c - kExtractTol,
            "lead headway under tau_c at " + n.id);
    require(t.tau_wrap >= flow.tau_c - kExtractTol,
            "wrap headway under tau_c at " + n.id);
    const double occupied = s.movements.at(pair[0]->id).occupancy +
                            s.movements.at(pair[1]->id).occupancy;
    require(std::abs(t.tau_lead + t.tau_wrap + occupied - s.cycle) <=
                kExtractTol,
            "rotation does not close at " + n.id);

    // the lead gap must equal what the arrival times actually leave open
    const double gap = s.arrivals.at(t.second).at(n.id) -
                       s.arrivals.at(t.first).at(n.id) -
                       s.movements.at(t.first).occupancy;
    require(std::abs(gap - t.tau_lead) <= kExtractTol,
            "order bit contradicts arrivals at " + n.id);
    s.nodes.emplace(n.id, t);
  }
  return s;
}

OccupancyTimeline expand_timeline(const CyclicSchedule& s, int k_cycles) {
  OccupancyTimeline tl;
  tl.k_cycles = k_cycles;
  for (const auto& [node, timing] : s.nodes) {
    auto& list = tl.by_node[node];
    for (const auto& pid : {timing.first, timing.second}) {
      auto ait = s.arrivals.find(pid);
      if (ait == s.arrivals.end()) continue;
      auto nit = ait->second.find(node);
      if (nit == ait->second.end()) continue;
      const double occ = s.movements.at(pid).occupancy;
      for (int m = 0; m < k_cycles; ++m) {
        const double start = nit->second + m * s.cycle;
        list.push_back(OccupancyInterval{start, start + occ, pid, m});
      }
    }
    std::sort(list.begin(), list.end(),
              [](const OccupancyInterval& a, const OccupancyInterval& b) {
                return a.start < b.start;
              });
  }
  return tl;
}

SafetyReport verify_safety(const CyclicSchedule& s, const ConflictGraph& g,
                           int k_cycles) {
  if (k_cycles < 3) {
    throw std::invalid_argument("verify_safety needs at least 3 cycles");
  }
  SafetyReport report;
  const auto& flow = s.params.flow;

  // (a) rear-to-front clearance between platoons of different movements
  const auto tl = expand_timeline(s, k_cycles);
  for (const auto& n : g.nodes()) {
    auto it = tl.by_node.find(n.id);
    if (it == tl.by_node.end() ||
        it->second.size() != 2 * static_cast<std::size_t>(k_cycles)) {
      report.violations.push_back(
          {n.id, "", "coverage", 0.0, 0.0, 0.0});
      continue;
    }
    const auto& list = it->second;
    for (std::size_t i = 0; i + 1 < list.size(); ++i) {
      const auto& prev = list[i];
      const auto& next = list[i + 1];
      if (prev.movement == next.movement) {
        report.violations.push_back({n.id, next.movement, "alternation", 0.0,
                                     0.0, next.start});
        continue;
      }
      const double gap = next.start - prev.end;
      if (gap < flow.tau_c - 1e-9) {
        report.violations.push_back({n.id, next.movement, "clearance", gap,
                                     flow.tau_c, next.start});
      }
    }
  }

  // (b) in-platoon spacing: fronts exactly tau_f + l/v_f apart, which pins
  // the occupancy to (L-1) tau_f + L l/v_f
  for (const auto& [pid, t] : s.movements) {
    const double want =
        (t.platoon - 1) * flow.tau_f + t.platoon * flow.body_time();
    if (std::abs(t.occupancy - want) > 1e-6) {
      report.violations.push_back(
          {"", pid, "spacing", t.occupancy, want, 0.0});
    }
  }
  return report;
}

Prop1Result check_prop1(const CyclicSchedule& s, const DemandMap& demands,
                        const CmatParameters& params) {
  Prop1Result res;
  const double qmax = params.flow.q_max();
  for (const auto& [pid, raw] : demands) {
    const double q = std::min(raw, qmax);
    if (q <= 0.0 || 1.0 / q > params.tau_star) continue;  // muted
    const double product = s.cycle * q;
    const double nearest = std::round(product);
    if (nearest < 1.0 || std::abs(product - nearest) > 1e-6) {
      res.holds = false;
      res.movement = pid;
      res.product = product;
      return res;
    }
  }
  return res;
}

}  // namespace cmat
