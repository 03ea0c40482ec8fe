#include <cmat/oracle.hpp>

#include <cmat/milp_model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cmat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct DiffEdge {
  int u, v;     ///< y[v] - y[u] <= w
  double w;
};

/// Feasible point of a difference-constraint system, or nullopt.
/// Vertex 0 is the origin; values are reported relative to it.
std::optional<std::vector<double>> solve_diffs(int nv,
                                               const std::vector<DiffEdge>& es) {
  std::vector<double> dist(nv, 0.0);
  for (int it = 0; it <= nv; ++it) {
    bool changed = false;
    for (const auto& e : es) {
      if (dist[e.u] + e.w < dist[e.v] - 1e-12) {
        dist[e.v] = dist[e.u] + e.w;
        changed = true;
      }
    }
    if (!changed) {
      const double o = dist[0];
      for (auto& v : dist) v -= o;
      return dist;
    }
  }
  return std::nullopt;
}

struct NodePair {
  std::string node;
  int p1, p2;          ///< movement indices, id of p1 < id of p2
  double tv1, tv2;     ///< travel times to the node
};

}  // namespace

MilpSolution enumerate_oracle(const ConflictGraph& g, const DemandMap& demand,
                              const CmatParameters& params, ModelKind model) {
  if (g.nodes().size() > 3) {
    throw std::invalid_argument("oracle handles at most 3 conflict nodes");
  }
  if (model == ModelKind::m2 && params.l_max() > 12) {
    throw std::invalid_argument(
        "oracle m2 enumeration needs l_max <= 12; lower c_bar");
  }

  auto mb = model == ModelKind::m1 ? build_m1(g, demand, params)
                                   : build_m2(g, demand, params);
  const MilpInstance& mi = mb.instance;

  const auto& movements = g.movements();
  const int P = static_cast<int>(movements.size());
  const double q_cap = params.flow.q_max();
  const double sat = params.flow.saturation_headway();
  const double tau_c = params.flow.tau_c;
  const double tau_f = params.flow.tau_f;
  const double c_bar = params.c_bar;
  const int l_max = params.l_max();
  const double toff_cap = (P - 1) * c_bar;

  std::vector<double> q(P, 0.0);
  std::vector<bool> muted(P, false);
  std::vector<int> unmuted;
  for (int p = 0; p < P; ++p) {
    auto it = demand.find(movements[p].id);
    if (it != demand.end()) q[p] = std::min(std::max(it->second, 0.0), q_cap);
    muted[p] = mb.muted.count(movements[p].id) > 0;
    if (!muted[p]) unmuted.push_back(p);
  }

  std::vector<NodePair> pairs;
  for (const auto& node : g.nodes()) {
    const auto at = g.movements_at(node.id);
    NodePair np;
    np.node = node.id;
    np.p1 = np.p2 = -1;
    for (int p = 0; p < P; ++p) {
      if (movements[p].id == at[0]->id) np.p1 = p;
      if (movements[p].id == at[1]->id) np.p2 = p;
    }
    np.tv1 = travel_time(g, movements[np.p1], node.id, params.flow.v_f);
    np.tv2 = travel_time(g, movements[np.p2], node.id, params.flow.v_f);
    pairs.push_back(np);
  }
  const int N = static_cast<int>(pairs.size());

  MilpSolution best;
  best.status = MilpStatus::infeasible;
  double best_obj = kInf;
  long tried = 0;

  // Settles offsets for fixed shapes; on success assembles the full
  // variable vector, verifies it against the instance and keeps the best.
  auto try_config = [&](double C, const std::vector<int>& L, unsigned zmask) {
    ++tried;
    std::vector<double> T(P), gr(P), r(P);
    for (int p = 0; p < P; ++p) {
      T[p] = L[p] * sat - tau_f;
      gr[p] = muted[p] ? 0.0 : L[p] * sat;
      r[p] = C - gr[p];
      if (r[p] < -1e-9) return;
    }
    std::vector<DiffEdge> es;
    for (int p = 0; p < P; ++p) {
      es.push_back({0, p + 1, r[p] + toff_cap});  // s_p <= r_p + cap
      es.push_back({p + 1, 0, -r[p]});            // s_p >= r_p
    }
    for (int k = 0; k < N; ++k) {
      const auto& np = pairs[k];
      const bool zf = (zmask >> k) & 1u;
      double lo, hi;  // window for tarr2 - tarr1
      if (zf) {
        lo = tau_c + T[np.p1];
        hi = C - T[np.p2] - tau_c;
      } else {
        lo = -(C - T[np.p1] - tau_c);
        hi = -(tau_c + T[np.p2]);
      }
      if (lo > hi + 1e-12) return;
      const double shift = np.tv2 - np.tv1;
      es.push_back({np.p1 + 1, np.p2 + 1, hi - shift});
      es.push_back({np.p2 + 1, np.p1 + 1, -(lo - shift)});
    }
    auto sol = solve_diffs(P + 1, es);
    if (!sol) return;

    std::vector<double> x(mi.variables().size(), 0.0);
    x[mi.index_of("C")] = C;
    for (int p = 0; p < P; ++p) {
      const auto& id = movements[p].id;
      x[mi.index_of("r[" + id + "]")] = r[p];
      x[mi.index_of("g[" + id + "]")] = gr[p];
      x[mi.index_of("L[" + id + "]")] = L[p];
      x[mi.index_of("toff[" + id + "]")] = (*sol)[p + 1] - r[p];
      x[mi.index_of("T[" + id + "]")] = T[p];
      for (const auto& nid : movements[p].nodes) {
        x[mi.index_of("tarr[" + id + "," + nid + "]")] =
            (*sol)[p + 1] + travel_time(g, movements[p], nid, params.flow.v_f);
      }
    }
    for (int k = 0; k < N; ++k) {
      const auto& np = pairs[k];
      const bool zf = (zmask >> k) & 1u;
      const double a1 = (*sol)[np.p1 + 1] + np.tv1;
      const double a2 = (*sol)[np.p2 + 1] + np.tv2;
      const double tau1 = zf ? a2 - a1 - T[np.p1] : a1 - a2 - T[np.p2];
      x[mi.index_of("tau1[" + np.node + "]")] = tau1;
      x[mi.index_of("tau2[" + np.node + "]")] =
          C - tau1 - T[np.p1] - T[np.p2];
      const double zv = zf ? 1.0 : 0.0;
      x[mi.index_of("z[" + np.node + "]")] = zv;
      x[mi.index_of("xlo[" + np.node + "]")] = zv * a1;
      x[mi.index_of("xhi[" + np.node + "]")] = zv * a2;
      x[mi.index_of("ylo[" + np.node + "]")] = zv * T[np.p1];
      x[mi.index_of("yhi[" + np.node + "]")] = zv * T[np.p2];
    }
    if (!violations(mi, x, 1e-6, 1e-6).empty()) return;
    const double obj = eval_objective(mi, x);
    if (obj < best_obj - 1e-12) {
      best_obj = obj;
      best.status = MilpStatus::optimal;
      best.objective = obj;
      best.x = std::move(x);
    }
  };

  // Smallest feasible cycle for a fixed shape; reuses the monotone widening
  // of the ordering windows in C.
  auto min_cycle_config = [&](const std::vector<int>& L, unsigned zmask) {
    std::vector<double> T(P);
    double floor_c = 0.0;
    for (int p = 0; p < P; ++p) {
      T[p] = L[p] * sat - tau_f;
      if (!muted[p]) floor_c = std::max(floor_c, L[p] * sat);
    }
    for (const auto& np : pairs) {
      floor_c = std::max(floor_c, T[np.p1] + T[np.p2] + 2.0 * tau_c);
    }
    if (floor_c > c_bar + 1e-9) return;
    auto feasible = [&](double C) {
      std::vector<DiffEdge> es;
      for (int p = 0; p < P; ++p) {
        const double rp = C - (muted[p] ? 0.0 : L[p] * sat);
        es.push_back({0, p + 1, rp + toff_cap});
        es.push_back({p + 1, 0, -rp});
      }
      for (int k = 0; k < N; ++k) {
        const auto& np = pairs[k];
        const bool zf = (zmask >> k) & 1u;
        const double lo = zf ? tau_c + T[np.p1] : -(C - T[np.p1] - tau_c);
        const double hi = zf ? C - T[np.p2] - tau_c : -(tau_c + T[np.p2]);
        if (lo > hi + 1e-12) return false;
        const double shift = np.tv2 - np.tv1;
        es.push_back({np.p1 + 1, np.p2 + 1, hi - shift});
        es.push_back({np.p2 + 1, np.p1 + 1, -(lo - shift)});
      }
      return solve_diffs(P + 1, es).has_value();
    };
    double lo = floor_c, hi = c_bar;
    if (feasible(lo)) {
      try_config(lo, L, zmask);
      return;
    }
    if (!feasible(hi)) return;
    for (int it = 0; it < 64 && hi - lo > 1e-9; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (feasible(mid)) hi = mid;
      else lo = mid;
    }
    try_config(hi, L, zmask);
  };

  const unsigned zcount = 1u << N;
  if (model == ModelKind::m1) {
    if (unmuted.empty()) {
      const std::vector<int> L(P, 1);
      for (unsigned zm = 0; zm < zcount; ++zm) min_cycle_config(L, zm);
    } else {
      const double q1 = q[unmuted.front()];
      const int k_max = static_cast<int>(std::floor(q1 * c_bar + 1e-9));
      for (int k = 1; k <= k_max; ++k) {
        const double C = k / q1;
        std::vector<int> L(P, 1);
        bool ok = true;
        for (int p : unmuted) {
          const double lr = q[p] * C;
          const double ln = std::round(lr);
          if (std::abs(lr - ln) > 1e-9 || ln < 0.5 || ln > l_max) {
            ok = false;
            break;
          }
          L[p] = static_cast<int>(ln);
        }
        if (!ok) continue;
        for (unsigned zm = 0; zm < zcount; ++zm) try_config(C, L, zm);
      }
    }
  } else {
    const int cap = std::min(12, l_max);
    std::vector<int> L(P, 1);
    for (;;) {
      for (unsigned zm = 0; zm < zcount; ++zm) min_cycle_config(L, zm);
      // odometer over the unmuted platoon sizes
      int pos = static_cast<int>(unmuted.size()) - 1;
      while (pos >= 0) {
        if (++L[unmuted[pos]] <= cap) break;
        L[unmuted[pos]] = 1;
        --pos;
      }
      if (pos < 0) break;
    }
  }

  best.stats.nodes = tried;
  return best;
}

}  // namespace cmat
