#pragma once

#include <cmat/baselines.hpp>
#include <cmat/conflict_graph.hpp>
#include <cmat/parameters.hpp>
#include <cmat/schedule.hpp>

#include <map>
#include <string>
#include <vector>

namespace cmat {

enum class ArrivalModel { deterministic, poisson };

struct SimConfig {
  double horizon_s = 3600.0;
  double warmup_s = 120.0;  ///< excluded from every metric
  ArrivalModel arrivals = ArrivalModel::deterministic;
  unsigned long long seed = 0;  ///< poisson gap stream seed
};

struct MovementMetrics {
  long arrivals = 0;   ///< vehicles entering before the horizon
  long served = 0;     ///< vehicles past the entrance stop line by the horizon
  long completed = 0;  ///< vehicles out of the control area by the horizon
  long counted = 0;    ///< completions inside the measured window
  double throughput_vph = 0.0;
  double mean_delay_s = 0.0;
  long max_queue = 0;       ///< entrance queue peak inside the window
  long residual_queue = 0;  ///< still waiting at the horizon
};

struct SimMetrics {
  double throughput_vph = 0.0;
  double mean_delay_s = 0.0;  ///< over vehicles counted in the window
  long max_queue = 0;
  long residual_queue = 0;
  std::map<std::string, MovementMetrics> per_movement;
};

/// Entrance stop-line departure times per movement, for property checks.
struct SimTrace {
  std::map<std::string, std::vector<double>> departures;
};

/// Plays deterministic or seeded poisson arrivals against a platoon
/// schedule. Vehicles queue at the entrance, depart in FIFO order at the
/// saturation headway inside their release window (at most L_p per cycle),
/// cross the area at v_f and complete after the travel to their last
/// conflict point plus one body passage. Delay is time lost against the
/// free-flow traversal. Throws std::invalid_argument when the schedule does
/// not cover the graph or the config window is empty.
SimMetrics simulate(const CyclicSchedule& s, const ConflictGraph& g,
                    const DemandMap& demands, const SimConfig& cfg,
                    SimTrace* trace = nullptr);

/// Same arrival and traversal model against a fixed-time plan: one stop
/// line per signalized intersection on the movement's path, departures at
/// the saturation headway inside any green that serves it, no per-cycle
/// cap. Queued transfers between intersections add to the same delay.
SimMetrics simulate(const SignalPlan& plan, const ConflictGraph& g,
                    const DemandMap& demands, const SimConfig& cfg,
                    SimTrace* trace = nullptr);

}  // namespace cmat
