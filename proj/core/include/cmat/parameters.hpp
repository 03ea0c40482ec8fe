#pragma once

#include <cmath>
#include <map>
#include <string>

namespace cmat {

/// Car-following and geometry constants shared by the analytic model,
/// the MILP builders, and the simulator.
struct FlowParameters {
  double v_f = 18.0;    ///< free-flow speed, m/s
  double l = 4.5;       ///< effective vehicle length (body + standstill gap), m
  double tau_f = 1.0;   ///< follower time headway inside a platoon, s
  double tau_c = 2.0;   ///< clearance headway between conflicting platoons, s

  /// Time for one vehicle body to traverse a point, s.
  double body_time() const { return l / v_f; }

  /// Saturation headway between consecutive same-movement vehicles, s.
  double saturation_headway() const { return tau_f + body_time(); }

  /// Max service rate of a single gate, veh/s.
  double q_max() const { return 1.0 / saturation_headway(); }

  /// Mean headway when a fraction alpha of gaps are conflict gaps, s.
  double mixed_headway(double alpha) const {
    return alpha * tau_c + (1.0 - alpha) * tau_f + body_time();
  }
};

/// Full cyclic-modulation parameter set.
struct CmatParameters {
  FlowParameters flow;
  double tau_star = 10.0;   ///< muting threshold on mean inter-arrival time, s
  double lambda = 0.9;      ///< objective weight between cycle and platoon terms
  double c_bar = 120.0;     ///< cycle length cap, s

  /// Largest platoon size representable within one cycle at saturation flow.
  /// The epsilon guards the case where c_bar * q_max() lands exactly on an
  /// integer but rounds up in binary (120 * 0.8 does).
  int l_max() const {
    return static_cast<int>(std::floor(c_bar * flow.q_max() + 1e-9));
  }
};

/// Demand per movement, veh/s, keyed by movement id. Ordered so that every
/// iteration over demands is deterministic.
using DemandMap = std::map<std::string, double>;

/// veh/h to veh/s.
inline double vph(double vehicles_per_hour) { return vehicles_per_hour / 3600.0; }

}  // namespace cmat
