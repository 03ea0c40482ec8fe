#include <cmat/milp_model.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace cmat {

namespace {

/// Per-movement arrival rate after clamping to saturation flow. Missing
/// entries count as zero, negative ones are programming errors.
std::map<std::string, double> effective_demand(const ConflictGraph& g,
                                               const DemandMap& demand,
                                               const CmatParameters& params,
                                               std::vector<std::string>* warnings) {
  std::map<std::string, double> q;
  const double qmax = params.flow.q_max();
  for (const auto& m : g.movements()) {
    auto it = demand.find(m.id);
    double v = it == demand.end() ? 0.0 : it->second;
    if (v < 0.0) {
      throw std::invalid_argument("negative demand for movement " + m.id);
    }
    if (v > qmax) {
      if (warnings) {
        warnings->push_back("demand for " + m.id +
                            " exceeds saturation flow; clamped");
      }
      v = qmax;
    }
    q.emplace(m.id, v);
  }
  return q;
}

bool is_muted(double q, double tau_star) {
  if (q <= 0.0) return true;
  return 1.0 / q > tau_star;
}

ModelBuild build_model(const ConflictGraph& g, const DemandMap& demand,
                       const CmatParameters& params, bool with_service_rate) {
  ModelBuild out;
  out.params = params;
  auto& mi = out.instance;
  mi.name = with_service_rate ? "m1" : "m2";

  const auto q = effective_demand(g, demand, params, &out.warnings);
  for (const auto& [p, rate] : q) {
    if (is_muted(rate, params.tau_star)) out.muted.insert(p);
  }

  const double qmax = params.flow.q_max();
  const double sat = params.flow.saturation_headway();
  const double body = params.flow.body_time();
  const double tau_f = params.flow.tau_f;
  const double tau_c = params.flow.tau_c;
  const double cbar = params.c_bar;
  const int lmax = params.l_max();
  const auto np = static_cast<double>(g.movements().size());
  const double t_ub = (lmax - 1) * tau_f + lmax * body;

  mi.add_variable("C", VarKind::continuous, 0.0, cbar);
  for (const auto& p : g.movements()) {
    bool muted = out.muted.count(p.id) != 0;
    mi.add_variable("r[" + p.id + "]", VarKind::continuous, 0.0, cbar);
    mi.add_variable("g[" + p.id + "]", VarKind::continuous, 0.0, cbar);
    mi.add_variable("L[" + p.id + "]", VarKind::integer, 1.0,
                    muted ? 1.0 : static_cast<double>(lmax));
    mi.add_variable("toff[" + p.id + "]", VarKind::continuous, 0.0,
                    (np - 1.0) * cbar);
    mi.add_variable("T[" + p.id + "]", VarKind::continuous, body, t_ub);
  }
  for (const auto& n : g.nodes()) {
    mi.add_variable("tau1[" + n.id + "]", VarKind::continuous, tau_c, cbar);
    mi.add_variable("tau2[" + n.id + "]", VarKind::continuous, tau_c, cbar);
  }
  for (const auto& p : g.movements()) {
    for (const auto& n : p.nodes) {
      double travel = travel_time(g, p, n, params.flow.v_f);
      mi.add_variable("tarr[" + p.id + "," + n + "]", VarKind::continuous, 0.0,
                      np * cbar - sat + travel);
    }
  }
  for (const auto& n : g.nodes()) {
    auto pair = g.movements_at(n.id);
    if (pair.size() != 2) {
      throw std::invalid_argument("node " + n.id +
                                  " must host exactly two movements");
    }
    const auto& p1 = pair[0]->id;
    const auto& p2 = pair[1]->id;
    mi.add_variable("z[" + n.id + "]", VarKind::binary, 0.0, 1.0);
    double ub1 = mi.variables()[mi.index_of("tarr[" + p1 + "," + n.id + "]")].ub;
    double ub2 = mi.variables()[mi.index_of("tarr[" + p2 + "," + n.id + "]")].ub;
    mi.add_variable("xlo[" + n.id + "]", VarKind::continuous, 0.0, ub1);
    mi.add_variable("xhi[" + n.id + "]", VarKind::continuous, 0.0, ub2);
    mi.add_variable("ylo[" + n.id + "]", VarKind::continuous, 0.0, t_ub);
    mi.add_variable("yhi[" + n.id + "]", VarKind::continuous, 0.0, t_ub);
  }

  auto ix = [&mi](const std::string& name) { return mi.index_of(name); };
  const int vC = ix("C");

  // one full rotation per cycle at every conflict point
  for (const auto& n : g.nodes()) {
    auto pair = g.movements_at(n.id);
    mi.add_row("c_cycle_node[" + n.id + "]",
               {{ix("tau1[" + n.id + "]"), 1.0},
                {ix("tau2[" + n.id + "]"), 1.0},
                {ix("T[" + pair[0]->id + "]"), 1.0},
                {ix("T[" + pair[1]->id + "]"), 1.0},
                {vC, -1.0}},
               RowSense::eq, 0.0);
  }
  // red plus green time covers the cycle for every movement
  for (const auto& p : g.movements()) {
    mi.add_row("c_cycle_move[" + p.id + "]",
               {{ix("r[" + p.id + "]"), 1.0},
                {ix("g[" + p.id + "]"), 1.0},
                {vC, -1.0}},
               RowSense::eq, 0.0);
  }
  // green window sized for the platoon at saturation flow
  for (const auto& p : g.movements()) {
    if (out.muted.count(p.id)) continue;
    mi.add_row("c_platoon_size[" + p.id + "]",
               {{ix("L[" + p.id + "]"), 1.0},
                {ix("g[" + p.id + "]"), -qmax}},
               RowSense::eq, 0.0);
  }
  // platoon absorbs exactly one cycle's worth of arrivals
  if (with_service_rate) {
    for (const auto& p : g.movements()) {
      if (out.muted.count(p.id)) continue;
      double qp = q.at(p.id);
      mi.add_row("c_serv_rate[" + p.id + "]",
                 {{ix("r[" + p.id + "]"), qp},
                  {ix("g[" + p.id + "]"), qp},
                  {ix("L[" + p.id + "]"), -1.0}},
                 RowSense::eq, 0.0);
    }
  }
  // time for the whole platoon to pass a point
  for (const auto& p : g.movements()) {
    mi.add_row("c_platoon_time[" + p.id + "]",
               {{ix("T[" + p.id + "]"), 1.0},
                {ix("L[" + p.id + "]"), -sat}},
               RowSense::eq, -tau_f);
  }
  // head-of-platoon arrival at each conflict point it crosses
  for (const auto& p : g.movements()) {
    for (const auto& n : p.nodes) {
      double travel = travel_time(g, p, n, params.flow.v_f);
      mi.add_row("c_arrive[" + p.id + "," + n + "]",
                 {{ix("tarr[" + p.id + "," + n + "]"), 1.0},
                  {ix("toff[" + p.id + "]"), -1.0},
                  {ix("r[" + p.id + "]"), -1.0}},
                 RowSense::eq, travel);
    }
  }
  // leading inter-platoon gap, linearized over both passage orders
  for (const auto& n : g.nodes()) {
    auto pair = g.movements_at(n.id);
    const auto& p1 = pair[0]->id;
    const auto& p2 = pair[1]->id;
    mi.add_row("c_headway[" + n.id + "]",
               {{ix("tau1[" + n.id + "]"), 1.0},
                {ix("tarr[" + p1 + "," + n.id + "]"), -1.0},
                {ix("tarr[" + p2 + "," + n.id + "]"), 1.0},
                {ix("T[" + p2 + "]"), 1.0},
                {ix("xhi[" + n.id + "]"), -2.0},
                {ix("xlo[" + n.id + "]"), 2.0},
                {ix("ylo[" + n.id + "]"), 1.0},
                {ix("yhi[" + n.id + "]"), -1.0}},
               RowSense::eq, 0.0);
    // product reformulation rows for each bilinear auxiliary
    struct AuxDef {
      const char* label;
      std::string aux;
      std::string linked;
    };
    const AuxDef defs[] = {
        {"xlo", "xlo[" + n.id + "]", "tarr[" + p1 + "," + n.id + "]"},
        {"xhi", "xhi[" + n.id + "]", "tarr[" + p2 + "," + n.id + "]"},
        {"ylo", "ylo[" + n.id + "]", "T[" + p1 + "]"},
        {"yhi", "yhi[" + n.id + "]", "T[" + p2 + "]"},
    };
    const int vz = ix("z[" + n.id + "]");
    for (const auto& d : defs) {
      const int va = ix(d.aux);
      const int vx = ix(d.linked);
      const double lb = mi.variables()[vx].lb;
      const double ub = mi.variables()[vx].ub;
      const std::string tag = "[" + n.id + "," + d.label + "]";
      mi.add_row("c_rlt1" + tag, {{va, 1.0}, {vz, -lb}}, RowSense::ge, 0.0);
      mi.add_row("c_rlt2" + tag, {{va, 1.0}, {vz, -ub}}, RowSense::le, 0.0);
      mi.add_row("c_rlt3" + tag, {{va, 1.0}, {vx, -1.0}, {vz, -ub}},
                 RowSense::ge, -ub);
      mi.add_row("c_rlt4" + tag, {{va, 1.0}, {vx, -1.0}, {vz, -lb}},
                 RowSense::le, -lb);
    }
  }

  const double lam = params.lambda;
  mi.set_objective(vC, with_service_rate ? lam : 1.0 - lam);
  for (const auto& p : g.movements()) {
    mi.set_objective(ix("L[" + p.id + "]"),
                     with_service_rate ? -(1.0 - lam) : -lam);
  }
  return out;
}

}  // namespace

std::set<std::string> muted_set(const ConflictGraph& g, const DemandMap& demand,
                                const CmatParameters& params) {
  std::set<std::string> muted;
  auto q = effective_demand(g, demand, params, nullptr);
  for (const auto& [p, rate] : q) {
    if (is_muted(rate, params.tau_star)) muted.insert(p);
  }
  return muted;
}

ModelBuild build_m1(const ConflictGraph& g, const DemandMap& demand,
                    const CmatParameters& params) {
  return build_model(g, demand, params, true);
}

ModelBuild build_m2(const ConflictGraph& g, const DemandMap& demand,
                    const CmatParameters& params) {
  return build_model(g, demand, params, false);
}

M2Precondition check_m2_precondition(const ConflictGraph& g,
                                     const DemandMap& demand,
                                     const CmatParameters& params) {
  M2Precondition res;
  auto q = effective_demand(g, demand, params, nullptr);
  const double tau_c = params.flow.tau_c;
  const double body = params.flow.body_time();
  double min_cycle = 2.0 * tau_c + 2.0 * body;
  for (const auto& [p, rate] : q) {
    if (rate <= 0.0) continue;
    min_cycle = std::max(min_cycle, 1.0 / rate);
  }
  res.min_cycle = min_cycle;
  if (params.c_bar < min_cycle) {
    res.ok = false;
    res.failures.push_back("cycle cap " + std::to_string(params.c_bar) +
                           " is below the required " +
                           std::to_string(min_cycle));
  }
  const double mute_cap = min_cycle - params.flow.saturation_headway();
  if (params.tau_star > mute_cap) {
    res.ok = false;
    res.failures.push_back("tau_star " + std::to_string(params.tau_star) +
                           " exceeds the muting cap " +
                           std::to_string(mute_cap));
  }
  return res;
}

StartVector feasible_start(const ConflictGraph& g, const DemandMap& demand,
                           const CmatParameters& params) {
  StartVector out;
  // The construction needs its cycle to fit under the cap; the rows it must
  // satisfy are demand-free beyond that.
  auto pre = check_m2_precondition(g, demand, params);
  if (params.c_bar < pre.min_cycle) {
    out.detail = "cycle cap " + std::to_string(params.c_bar) +
                 " is below the required " + std::to_string(pre.min_cycle);
    return out;
  }

  auto m2 = build_m2(g, demand, params);
  const auto& mi = m2.instance;
  const double body = params.flow.body_time();
  const double tau_c = params.flow.tau_c;
  const double sat = params.flow.saturation_headway();
  const double C = pre.min_cycle;
  const double green = sat;  // one vehicle per cycle
  const double red = C - green;

  // offsets from the tight-headway equalities, walked over a spanning
  // forest; alphabetically earlier movements pass first everywhere
  std::map<std::string, double> toff;
  std::map<std::string, std::vector<std::pair<std::string, double>>> adj;
  for (const auto& n : g.nodes()) {
    auto pair = g.movements_at(n.id);
    const auto& p1 = *pair[0];
    const auto& p2 = *pair[1];
    double t1 = travel_time(g, p1, n.id, params.flow.v_f);
    double t2 = travel_time(g, p2, n.id, params.flow.v_f);
    double delta = tau_c + body + t1 - t2;  // toff(p2) - toff(p1)
    adj[p1.id].push_back({p2.id, delta});
    adj[p2.id].push_back({p1.id, -delta});
  }
  for (const auto& seed : g.movements()) {
    if (toff.count(seed.id)) continue;
    std::vector<std::string> stack{seed.id};
    std::vector<std::string> component{seed.id};
    toff[seed.id] = 0.0;
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      for (const auto& [next, delta] : adj[cur]) {
        double want = toff[cur] + delta;
        auto it = toff.find(next);
        if (it == toff.end()) {
          toff[next] = want;
          component.push_back(next);
          stack.push_back(next);
        } else if (std::abs(it->second - want) > 1e-6) {
          out.detail = "offset system inconsistent around movement " + next;
          return out;
        }
      }
    }
    double lo = 0.0;
    for (const auto& p : component) lo = std::min(lo, toff[p]);
    for (const auto& p : component) toff[p] -= lo;
  }

  std::vector<double> x(mi.variables().size(), 0.0);
  auto set = [&](const std::string& name, double v) {
    x[static_cast<std::size_t>(mi.index_of(name))] = v;
  };
  set("C", C);
  for (const auto& p : g.movements()) {
    set("r[" + p.id + "]", red);
    set("g[" + p.id + "]", green);
    set("L[" + p.id + "]", 1.0);
    set("toff[" + p.id + "]", toff.at(p.id));
    set("T[" + p.id + "]", body);
    for (const auto& n : p.nodes) {
      set("tarr[" + p.id + "," + n + "]",
          toff.at(p.id) + red + travel_time(g, p, n, params.flow.v_f));
    }
  }
  for (const auto& n : g.nodes()) {
    auto pair = g.movements_at(n.id);
    const auto& p1 = pair[0]->id;
    const auto& p2 = pair[1]->id;
    set("z[" + n.id + "]", 1.0);
    set("tau1[" + n.id + "]", tau_c);
    set("tau2[" + n.id + "]", C - tau_c - 2.0 * body);
    double a1 = x[static_cast<std::size_t>(
        mi.index_of("tarr[" + p1 + "," + n.id + "]"))];
    double a2 = x[static_cast<std::size_t>(
        mi.index_of("tarr[" + p2 + "," + n.id + "]"))];
    set("xlo[" + n.id + "]", a1);
    set("xhi[" + n.id + "]", a2);
    set("ylo[" + n.id + "]", body);
    set("yhi[" + n.id + "]", body);
  }

  auto bad = violations(mi, x, 1e-6, 1e-6);
  if (!bad.empty()) {
    out.detail = "constructed point violates " + bad.front();
    return out;
  }
  out.ok = true;
  out.x = std::move(x);
  return out;
}

}  // namespace cmat
