#pragma once

#include <cmat/conflict_graph.hpp>
#include <cmat/parameters.hpp>

#include <map>
#include <string>
#include <vector>

namespace cmat {

/// Distances used when laying out the example networks.
struct GeometryParams {
  double internal_spacing_m = 20.0;       ///< spacing between adjacent conflict points
  double intersection_spacing_m = 500.0;  ///< link length between coupled intersections
};

enum class ScenarioKind {
  single_conflict,
  four_leg_dedicated,
  four_leg_shared,
  connected_pair,
};

ScenarioKind scenario_kind_from_string(const std::string& s);
std::string to_string(ScenarioKind kind);

/// Movements that a fixed-time controller may release together.
struct PhaseGroup {
  std::vector<std::string> movements;
};

/// Signal staging template for one intersection, in service order.
struct IntersectionTemplate {
  std::string id;
  std::vector<PhaseGroup> phases;
};

/// A ready-to-use test network: the conflict graph plus the demand and
/// control metadata the planners and the simulator need.
struct Scenario {
  ScenarioKind kind{};
  std::string name;
  GeometryParams geometry;
  ConflictGraph graph;

  /// demand_slots[i] lists the movements fed by entry i of a demand vector.
  std::vector<std::vector<std::string>> demand_slots;

  std::vector<IntersectionTemplate> intersections;
  std::map<std::string, std::string> node_intersection;  ///< node id -> intersection id
};

/// Builds one of the stock networks. Throws std::invalid_argument on
/// non-positive spacing.
Scenario build_scenario(ScenarioKind kind, const GeometryParams& geometry = {});

/// Staggered T-intersection: p1 crosses p2 at n1 and p3 at n2.
Scenario t_intersection(const GeometryParams& geometry = {});

/// Expands a per-slot demand vector (veh/h per slot entry), scaled by beta,
/// into per-movement arrival rates in veh/s. Throws std::invalid_argument if
/// the vector length does not match the scenario's slots.
DemandMap scale_demand(const Scenario& s, const std::vector<double>& slot_vph,
                       double beta);

}  // namespace cmat
