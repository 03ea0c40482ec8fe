#include <cmat/simulator.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace cmat {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// xorshift-based generator with a fully specified exponential draw, so a
/// seed pins the stream on every platform.
struct GapStream {
  std::uint64_t state;
  explicit GapStream(std::uint64_t seed) : state(seed | 1ULL) {}
  double uniform() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return (static_cast<double>(state >> 11) + 0.5) * 0x1.0p-53;
  }
  double exponential(double rate) { return -std::log(uniform()) / rate; }
};

std::vector<double> make_arrivals(const std::string& movement, double q,
                                  const SimConfig& cfg) {
  std::vector<double> times;
  if (q <= 0.0) return times;
  if (cfg.arrivals == ArrivalModel::deterministic) {
    const auto count = static_cast<long>(std::ceil(cfg.horizon_s * q));
    for (long i = 1; i <= count; ++i) {
      const double t = static_cast<double>(i) / q;
      if (t < cfg.horizon_s) times.push_back(t);
    }
  } else {
    GapStream rng(cfg.seed * 0x9E3779B97F4A7C15ULL ^ fnv1a(movement));
    double t = rng.exponential(q);
    while (t < cfg.horizon_s) {
      times.push_back(t);
      t += rng.exponential(q);
    }
  }
  return times;
}

/// Release gate with a per-cycle vehicle budget: the platoon pattern of a
/// cyclic schedule.
struct CappedGate {
  double anchor = 0.0;
  double cycle = 1.0;
  double headway = 1.0;
  int cap = 1;
  long cur = std::numeric_limits<long>::min();
  long used = 0;
  double last = -std::numeric_limits<double>::infinity();

  double pass(double ready) {
    double t = std::max(ready, last + headway);
    // walk the cycle index explicitly: recomputing it from t after a jump
    // to the next window start can round back down and stall
    auto m = static_cast<long>(std::floor((t - anchor) / cycle));
    for (;;) {
      const double gs = anchor + static_cast<double>(m) * cycle;
      if (t < gs) t = gs;
      if (m != cur) {
        cur = m;
        used = 0;
      }
      const double last_slot = gs + (cap - 1) * headway;
      if (used < cap && t <= last_slot + 1e-9) {
        last = t;
        ++used;
        return t;
      }
      ++m;
      t = anchor + static_cast<double>(m) * cycle;
    }
  }
};

/// Release gate bounded by green windows only: a signal head.
struct WindowGate {
  double cycle = 1.0;
  double headway = 1.0;
  std::vector<std::pair<double, double>> windows;  ///< within [0, cycle)
  double last = -std::numeric_limits<double>::infinity();

  double pass(double ready) {
    // some window of this cycle or the next always ends after t
    const double t = std::max(ready, last + headway);
    const double base = std::floor(t / cycle) * cycle;
    double best = std::numeric_limits<double>::infinity();
    for (double shift : {0.0, cycle}) {
      for (const auto& [a, b] : windows) {
        const double gs = base + shift + a;
        const double ge = base + shift + b;
        if (t < ge) best = std::min(best, std::max(t, gs));
      }
    }
    last = best;
    return best;
  }
};

struct ChainLink {
  WindowGate gate;
  double travel = 0.0;  ///< entrance to this stop line, s
};

struct Accumulator {
  std::vector<double> arrivals;
  std::vector<double> entry_departs;
  std::vector<double> completions;
  double freeflow = 0.0;
};

SimMetrics finish(std::map<std::string, Accumulator>& lanes,
                  const SimConfig& cfg, SimTrace* trace) {
  SimMetrics out;
  double delay_sum = 0.0;
  long counted = 0;
  for (auto& [pid, acc] : lanes) {
    MovementMetrics m;
    m.arrivals = static_cast<long>(acc.arrivals.size());

    double lane_delay = 0.0;
    for (std::size_t i = 0; i < acc.arrivals.size(); ++i) {
      if (acc.entry_departs[i] <= cfg.horizon_s) ++m.served;
      const double done = acc.completions[i];
      if (done <= cfg.horizon_s) {
        ++m.completed;
        if (done >= cfg.warmup_s) {
          ++m.counted;
          lane_delay += done - acc.arrivals[i] - acc.freeflow;
        }
      }
    }
    m.residual_queue = m.arrivals - m.served;
    const double window = cfg.horizon_s - cfg.warmup_s;
    m.throughput_vph = static_cast<double>(m.counted) / window * 3600.0;
    m.mean_delay_s =
        m.counted > 0 ? lane_delay / static_cast<double>(m.counted) : 0.0;

    // entrance queue sweep; departures release before arrivals join on ties
    std::size_t ai = 0;
    std::size_t di = 0;
    long queue = 0;
    while (ai < acc.arrivals.size() || di < acc.entry_departs.size()) {
      double ta = ai < acc.arrivals.size()
                      ? acc.arrivals[ai]
                      : std::numeric_limits<double>::infinity();
      double td = di < acc.entry_departs.size()
                      ? acc.entry_departs[di]
                      : std::numeric_limits<double>::infinity();
      if (std::min(ta, td) > cfg.horizon_s) break;
      if (td <= ta) {
        --queue;
        ++di;
      } else {
        ++queue;
        ++ai;
        if (ta >= cfg.warmup_s) m.max_queue = std::max(m.max_queue, queue);
      }
    }

    delay_sum += lane_delay;
    counted += m.counted;
    out.residual_queue += m.residual_queue;
    out.max_queue = std::max(out.max_queue, m.max_queue);
    if (trace) trace->departures[pid] = acc.entry_departs;
    out.per_movement.emplace(pid, m);
  }
  const double window = cfg.horizon_s - cfg.warmup_s;
  out.throughput_vph = static_cast<double>(counted) / window * 3600.0;
  out.mean_delay_s =
      counted > 0 ? delay_sum / static_cast<double>(counted) : 0.0;
  return out;
}

void check_config(const SimConfig& cfg) {
  if (cfg.warmup_s < 0.0 || cfg.horizon_s <= cfg.warmup_s) {
    throw std::invalid_argument("simulation window is empty");
  }
}

void check_demands(const ConflictGraph& g, const DemandMap& demands) {
  for (const auto& [pid, q] : demands) {
    (void)q;
    if (!g.find_movement(pid)) {
      throw std::invalid_argument("demand for unknown movement " + pid);
    }
  }
}

}  // namespace

SimMetrics simulate(const CyclicSchedule& s, const ConflictGraph& g,
                    const DemandMap& demands, const SimConfig& cfg,
                    SimTrace* trace) {
  check_config(cfg);
  check_demands(g, demands);
  const double headway = s.params.flow.saturation_headway();
  const double body = s.params.flow.body_time();

  std::map<std::string, Accumulator> lanes;
  for (const auto& p : g.movements()) {
    auto it = s.movements.find(p.id);
    if (it == s.movements.end()) {
      throw std::invalid_argument("schedule does not cover movement " + p.id);
    }
    const auto& t = it->second;

    auto dit = demands.find(p.id);
    const double q = dit == demands.end() ? 0.0 : dit->second;

    Accumulator acc;
    acc.arrivals = make_arrivals(p.id, q, cfg);
    acc.freeflow =
        travel_time(g, p, p.nodes.back(), s.params.flow.v_f) + body;

    CappedGate gate;
    double anchor = std::fmod(t.offset + t.red, s.cycle);
    if (anchor < 0.0) anchor += s.cycle;
    gate.anchor = anchor;
    gate.cycle = s.cycle;
    gate.headway = headway;
    gate.cap = t.platoon;

    for (double arr : acc.arrivals) {
      const double d = gate.pass(arr);
      acc.entry_departs.push_back(d);
      acc.completions.push_back(d + acc.freeflow);
    }
    lanes.emplace(p.id, std::move(acc));
  }
  return finish(lanes, cfg, trace);
}

SimMetrics simulate(const SignalPlan& plan, const ConflictGraph& g,
                    const DemandMap& demands, const SimConfig& cfg,
                    SimTrace* trace) {
  check_config(cfg);
  check_demands(g, demands);
  {
    auto issues = plan_issues(plan, g);
    if (!issues.empty()) {
      throw std::invalid_argument("plan does not fit the graph: " +
                                  issues.front());
    }
  }

  // movement id -> ordered green windows per intersection, within one cycle
  std::map<std::string, std::string> home;
  for (const auto& ip : plan.intersections) {
    for (const auto& n : ip.nodes) home[n] = ip.id;
  }

  const FlowParameters& flow = plan.params.flow;
  const double headway = flow.saturation_headway();
  const double body = flow.body_time();

  std::map<std::string, Accumulator> lanes;
  for (const auto& p : g.movements()) {
    auto dit = demands.find(p.id);
    const double q = dit == demands.end() ? 0.0 : dit->second;

    Accumulator acc;
    acc.arrivals = make_arrivals(p.id, q, cfg);
    acc.freeflow = travel_time(g, p, p.nodes.back(), flow.v_f) + body;

    // one gate per intersection on the path, at its first conflict point
    std::vector<ChainLink> chain;
    for (const auto& ip : plan.intersections) {
      double first_travel = std::numeric_limits<double>::infinity();
      for (const auto& n : p.nodes) {
        auto hit = home.find(n);
        if (hit != home.end() && hit->second == ip.id) {
          first_travel = std::min(first_travel,
                                  travel_time(g, p, n, flow.v_f));
        }
      }
      if (!std::isfinite(first_travel)) continue;

      double start = 0.0;
      WindowGate gate;
      gate.cycle = plan.cycle;
      gate.headway = headway;
      for (const auto& ph : ip.phases) {
        const bool serves =
            std::find(ph.movements.begin(), ph.movements.end(), p.id) !=
            ph.movements.end();
        if (serves && ph.green > 0.0) {
          double a = std::fmod(ip.offset + start, plan.cycle);
          if (a < 0.0) a += plan.cycle;
          double b = a + ph.green;
          if (b <= plan.cycle) {
            gate.windows.emplace_back(a, b);
          } else {  // split a wrapped window
            gate.windows.emplace_back(a, plan.cycle);
            gate.windows.emplace_back(0.0, b - plan.cycle);
          }
        }
        start += ph.green + ph.lost;
      }
      if (gate.windows.empty()) {
        throw std::invalid_argument("plan never releases " + p.id + " at " +
                                    ip.id);
      }
      std::sort(gate.windows.begin(), gate.windows.end());
      chain.push_back(ChainLink{std::move(gate), first_travel});
    }
    std::sort(chain.begin(), chain.end(),
              [](const ChainLink& a, const ChainLink& b) {
                return a.travel < b.travel;
              });

    for (double arr : acc.arrivals) {
      double ready = arr;
      double clock = 0.0;  // travel already spent
      double entry = arr;
      for (std::size_t k = 0; k < chain.size(); ++k) {
        ready += chain[k].travel - clock;
        clock = chain[k].travel;
        ready = chain[k].gate.pass(ready);
        if (k == 0) entry = ready;
      }
      acc.entry_departs.push_back(entry);
      acc.completions.push_back(ready + (acc.freeflow - clock));
    }
    lanes.emplace(p.id, std::move(acc));
  }
  return finish(lanes, cfg, trace);
}

}  // namespace cmat
