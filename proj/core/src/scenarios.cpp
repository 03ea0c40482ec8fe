#include <cmat/scenarios.hpp>

#include <stdexcept>
#include <utility>

namespace cmat {

namespace {

struct MoveSpec {
  const char* id;
  MovementKind kind;
  std::vector<const char*> nodes;
};

NodeKind node_kind_from_id(const std::string& id) {
  if (id.rfind("m_", 0) == 0) return NodeKind::merging;
  if (id.rfind("d_", 0) == 0) return NodeKind::diverging;
  return NodeKind::crossing;
}

/// Builds graph, arcs and movement records from the per-movement node tables.
/// Arc lengths come from the geometry: consecutive points inside one
/// intersection sit internal_spacing_m apart, points in different
/// intersections intersection_spacing_m apart.
Scenario assemble(ScenarioKind kind, std::string name,
                  const GeometryParams& geom,
                  const std::vector<MoveSpec>& moves,
                  std::vector<std::vector<std::string>> slots,
                  std::vector<IntersectionTemplate> intersections,
                  std::map<std::string, std::string> node_home) {
  if (geom.internal_spacing_m <= 0.0 || geom.intersection_spacing_m <= 0.0) {
    throw std::invalid_argument("scenario geometry: spacings must be positive");
  }

  std::map<std::string, NodeKind> node_kinds;
  std::vector<Movement> movements;
  for (const auto& spec : moves) {
    Movement m;
    m.id = spec.id;
    m.kind = spec.kind;
    for (const char* n : spec.nodes) {
      m.nodes.emplace_back(n);
      node_kinds.emplace(n, node_kind_from_id(n));
    }
    movements.push_back(std::move(m));
  }

  const std::string& default_home = intersections.front().id;
  auto home_of = [&](const std::string& node) -> const std::string& {
    auto it = node_home.find(node);
    return it == node_home.end() ? default_home : it->second;
  };

  std::vector<ConflictNode> nodes;
  nodes.reserve(node_kinds.size());
  std::map<std::string, std::string> full_home;
  for (const auto& [id, nk] : node_kinds) {
    nodes.push_back(ConflictNode{id, nk});
    full_home.emplace(id, home_of(id));
  }

  std::map<std::pair<std::string, std::string>, double> arc_lengths;
  for (const auto& m : movements) {
    for (std::size_t i = 0; i + 1 < m.nodes.size(); ++i) {
      const auto& a = m.nodes[i];
      const auto& b = m.nodes[i + 1];
      double len = full_home.at(a) == full_home.at(b)
                       ? geom.internal_spacing_m
                       : geom.intersection_spacing_m;
      arc_lengths.emplace(std::make_pair(a, b), len);
    }
  }
  std::vector<Arc> arcs;
  arcs.reserve(arc_lengths.size());
  for (const auto& [key, len] : arc_lengths) {
    arcs.push_back(Arc{key.first, key.second, len});
  }

  Scenario s;
  s.kind = kind;
  s.name = std::move(name);
  s.geometry = geom;
  s.graph = ConflictGraph(std::move(nodes), std::move(arcs), std::move(movements));
  s.demand_slots = std::move(slots);
  s.intersections = std::move(intersections);
  s.node_intersection = std::move(full_home);
  return s;
}

Scenario build_single_conflict(const GeometryParams& geom) {
  std::vector<MoveSpec> moves = {
      {"EB", MovementKind::through, {"c_EB_NB"}},
      {"NB", MovementKind::through, {"c_EB_NB"}},
  };
  return assemble(ScenarioKind::single_conflict, "single_conflict", geom, moves,
                  {{"EB"}, {"NB"}},
                  {{"main", {{{"EB"}}, {{"NB"}}}}},
                  {});
}

// Four-leg layout, one left-turn lane and two through lanes per approach.
// Lefts run inner-to-inner-through quarter arcs, so each one crosses the two
// same-side through lanes on its way in, both adjacent lefts near the middle,
// the two opposing through lanes on its way out, and finally merges into the
// receiving inner through lane. Opposing lefts clear each other.
const std::vector<MoveSpec>& dedicated_moves() {
  static const std::vector<MoveSpec> moves = {
      {"EL", MovementKind::left,
       {"c_EL_ST2", "c_EL_ST1", "a_EL_NL", "a_EL_SL", "c_EL_WT1", "c_EL_WT2",
        "m_EL_NT1"}},
      {"ET1", MovementKind::through,
       {"c_ET1_ST2", "c_ET1_ST1", "c_ET1_WL", "c_ET1_NL", "c_ET1_NT1",
        "c_ET1_NT2", "m_ET1_SL"}},
      {"ET2", MovementKind::through,
       {"c_ET2_ST2", "c_ET2_ST1", "c_ET2_WL", "c_ET2_NL", "c_ET2_NT1",
        "c_ET2_NT2"}},
      {"NL", MovementKind::left,
       {"c_ET2_NL", "c_ET1_NL", "a_NL_WL", "a_EL_NL", "c_NL_ST1", "c_NL_ST2",
        "m_NL_WT1"}},
      {"NT1", MovementKind::through,
       {"c_ET2_NT1", "c_ET1_NT1", "c_NT1_SL", "c_NT1_WL", "c_NT1_WT1",
        "c_NT1_WT2", "m_EL_NT1"}},
      {"NT2", MovementKind::through,
       {"c_ET2_NT2", "c_ET1_NT2", "c_NT2_SL", "c_NT2_WL", "c_NT2_WT1",
        "c_NT2_WT2"}},
      {"SL", MovementKind::left,
       {"c_SL_WT2", "c_SL_WT1", "a_EL_SL", "a_SL_WL", "c_NT1_SL", "c_NT2_SL",
        "m_ET1_SL"}},
      {"ST1", MovementKind::through,
       {"c_ST1_WT2", "c_ST1_WT1", "c_NL_ST1", "c_EL_ST1", "c_ET1_ST1",
        "c_ET2_ST1", "m_ST1_WL"}},
      {"ST2", MovementKind::through,
       {"c_ST2_WT2", "c_ST2_WT1", "c_NL_ST2", "c_EL_ST2", "c_ET1_ST2",
        "c_ET2_ST2"}},
      {"WL", MovementKind::left,
       {"c_NT2_WL", "c_NT1_WL", "a_SL_WL", "a_NL_WL", "c_ET1_WL", "c_ET2_WL",
        "m_ST1_WL"}},
      {"WT1", MovementKind::through,
       {"c_NT2_WT1", "c_NT1_WT1", "c_EL_WT1", "c_SL_WT1", "c_ST1_WT1",
        "c_ST2_WT1", "m_NL_WT1"}},
      {"WT2", MovementKind::through,
       {"c_NT2_WT2", "c_NT1_WT2", "c_EL_WT2", "c_SL_WT2", "c_ST1_WT2",
        "c_ST2_WT2"}},
  };
  return moves;
}

Scenario build_four_leg_dedicated(const GeometryParams& geom) {
  return assemble(
      ScenarioKind::four_leg_dedicated, "four_leg_dedicated", geom,
      dedicated_moves(),
      {{"ET1", "NT1", "ST1", "WT1"},
       {"ET2", "NT2", "ST2", "WT2"},
       {"EL", "NL", "SL", "WL"}},
      {{"main",
        {{{"NT1", "NT2", "ST1", "ST2"}},
         {{"NL", "SL"}},
         {{"ET1", "ET2", "WT1", "WT2"}},
         {{"EL", "WL"}}}}},
      {});
}

Scenario build_four_leg_shared(const GeometryParams& geom) {
  // Same box as the dedicated layout; the curb through lane doubles as the
  // right-turn lane, so each right splits off at the stop line and hugs the
  // corner into the receiving curb lane.
  static const std::vector<MoveSpec> shared_only = {
      {"ER", MovementKind::right, {"d_ER_ET2", "m_ER_ST2"}},
      {"ET2", MovementKind::through,
       {"d_ER_ET2", "c_ET2_ST2", "c_ET2_ST1", "c_ET2_WL", "c_ET2_NL",
        "c_ET2_NT1", "c_ET2_NT2", "m_ET2_NR"}},
      {"NR", MovementKind::right, {"d_NR_NT2", "m_ET2_NR"}},
      {"NT2", MovementKind::through,
       {"d_NR_NT2", "c_ET2_NT2", "c_ET1_NT2", "c_NT2_SL", "c_NT2_WL",
        "c_NT2_WT1", "c_NT2_WT2", "m_NT2_WR"}},
      {"SR", MovementKind::right, {"d_SR_ST2", "m_SR_WT2"}},
      {"ST2", MovementKind::through,
       {"d_SR_ST2", "c_ST2_WT2", "c_ST2_WT1", "c_NL_ST2", "c_EL_ST2",
        "c_ET1_ST2", "c_ET2_ST2", "m_ER_ST2"}},
      {"WR", MovementKind::right, {"d_WR_WT2", "m_NT2_WR"}},
      {"WT2", MovementKind::through,
       {"d_WR_WT2", "c_NT2_WT2", "c_NT1_WT2", "c_EL_WT2", "c_SL_WT2",
        "c_ST1_WT2", "c_ST2_WT2", "m_SR_WT2"}},
  };
  std::vector<MoveSpec> all;
  for (const auto& m : dedicated_moves()) {
    bool replaced = false;
    for (const auto& r : shared_only) {
      if (std::string(m.id) == r.id) replaced = true;
    }
    if (!replaced) all.push_back(m);
  }
  for (const auto& r : shared_only) all.push_back(r);

  return assemble(
      ScenarioKind::four_leg_shared, "four_leg_shared", geom, all,
      {{"ER", "NR", "SR", "WR"},
       {"ET1", "NT1", "ST1", "WT1"},
       {"ET2", "NT2", "ST2", "WT2"},
       {"EL", "NL", "SL", "WL"}},
      {{"main",
        {{{"NT1", "NT2", "ST1", "ST2", "NR", "SR"}},
         {{"NL", "SL"}},
         {{"ET1", "ET2", "WT1", "WT2", "ER", "WR"}},
         {{"EL", "WL"}}}}},
      {});
}

Scenario build_connected_pair(const GeometryParams& geom) {
  // Major four-leg intersection (one through + shared right lane and one
  // left lane per approach), plus a T-junction on the eastbound link where a
  // local road joins from the south. Eastbound the link carries the through
  // plus merged right traffic in the curb lane and the southbound left in
  // the inner lane; the local left crosses all three streams and merges into
  // the westbound inner lane, the local right merges into the curb lane.
  static const std::vector<MoveSpec> moves = {
      {"EL", MovementKind::left, {"c_EL_ST", "a_EL_NL", "a_EL_SL", "c_EL_WT"}},
      {"ER", MovementKind::right, {"d_ER_ET", "m_ER_ST"}},
      {"ET", MovementKind::through,
       {"d_ER_ET", "c_ET_ST", "c_ET_WL", "c_ET_NL", "c_ET_NT", "m_ET_NR",
        "c_ET_XL", "m_ET_XR"}},
      {"NL", MovementKind::left, {"c_ET_NL", "a_NL_WL", "a_EL_NL", "c_NL_ST"}},
      {"NR", MovementKind::right,
       {"d_NR_NT", "m_ET_NR", "c_NR_XL", "m_NR_XR"}},
      {"NT", MovementKind::through,
       {"d_NR_NT", "c_ET_NT", "c_NT_SL", "c_NT_WL", "c_NT_WT", "m_NT_WR"}},
      {"SL", MovementKind::left,
       {"c_SL_WT", "a_EL_SL", "a_SL_WL", "c_NT_SL", "c_SL_XL"}},
      {"SR", MovementKind::right, {"d_SR_ST", "m_SR_WT"}},
      {"ST", MovementKind::through,
       {"d_SR_ST", "c_ST_WT", "c_NL_ST", "c_EL_ST", "c_ET_ST", "m_ER_ST"}},
      {"WL", MovementKind::left,
       {"m_WL_XL", "c_NT_WL", "a_SL_WL", "a_NL_WL", "c_ET_WL"}},
      {"WR", MovementKind::right, {"d_WR_WT", "m_NT_WR"}},
      {"WT", MovementKind::through,
       {"d_WR_WT", "c_NT_WT", "c_EL_WT", "c_SL_WT", "c_ST_WT", "m_SR_WT"}},
      {"XL", MovementKind::left,
       {"c_ET_XL", "c_NR_XL", "c_SL_XL", "m_WL_XL"}},
      {"XR", MovementKind::right, {"m_ET_XR", "m_NR_XR"}},
  };
  std::map<std::string, std::string> node_home = {
      {"c_ET_XL", "minor"}, {"c_NR_XL", "minor"}, {"c_SL_XL", "minor"},
      {"m_WL_XL", "minor"}, {"m_ET_XR", "minor"}, {"m_NR_XR", "minor"},
  };
  return assemble(
      ScenarioKind::connected_pair, "connected_pair", geom, moves,
      {{"ER", "NR", "SR", "WR", "XR"},
       {"ET", "NT", "ST", "WT"},
       {"EL", "NL", "SL", "WL", "XL"}},
      {{"major",
        {{{"NT", "ST", "NR", "SR"}},
         {{"NL", "SL"}},
         {{"ET", "WT", "ER", "WR"}},
         {{"EL", "WL"}}}},
       {"minor", {{{"ET", "NR", "SL", "WL"}}, {{"XL", "XR"}}}}},
      std::move(node_home));
}

}  // namespace

ScenarioKind scenario_kind_from_string(const std::string& s) {
  if (s == "single_conflict") return ScenarioKind::single_conflict;
  if (s == "four_leg_dedicated") return ScenarioKind::four_leg_dedicated;
  if (s == "four_leg_shared") return ScenarioKind::four_leg_shared;
  if (s == "connected_pair") return ScenarioKind::connected_pair;
  throw std::invalid_argument("unknown scenario kind: " + s);
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::single_conflict: return "single_conflict";
    case ScenarioKind::four_leg_dedicated: return "four_leg_dedicated";
    case ScenarioKind::four_leg_shared: return "four_leg_shared";
    case ScenarioKind::connected_pair: return "connected_pair";
  }
  throw std::invalid_argument("unknown scenario kind");
}

Scenario build_scenario(ScenarioKind kind, const GeometryParams& geometry) {
  switch (kind) {
    case ScenarioKind::single_conflict: return build_single_conflict(geometry);
    case ScenarioKind::four_leg_dedicated:
      return build_four_leg_dedicated(geometry);
    case ScenarioKind::four_leg_shared: return build_four_leg_shared(geometry);
    case ScenarioKind::connected_pair: return build_connected_pair(geometry);
  }
  throw std::invalid_argument("unknown scenario kind");
}

Scenario t_intersection(const GeometryParams& geometry) {
  std::vector<MoveSpec> moves = {
      {"p1", MovementKind::through, {"n1", "n2"}},
      {"p2", MovementKind::left, {"n1"}},
      {"p3", MovementKind::left, {"n2"}},
  };
  Scenario s = assemble(ScenarioKind::single_conflict, "t_intersection",
                        geometry, moves, {{"p1"}, {"p2"}, {"p3"}},
                        {{"main", {{{"p1"}}, {{"p2", "p3"}}}}}, {});
  return s;
}

DemandMap scale_demand(const Scenario& s, const std::vector<double>& slot_vph,
                       double beta) {
  if (slot_vph.size() != s.demand_slots.size()) {
    throw std::invalid_argument("demand vector has " +
                                std::to_string(slot_vph.size()) +
                                " entries, scenario expects " +
                                std::to_string(s.demand_slots.size()));
  }
  DemandMap demand;
  for (std::size_t i = 0; i < slot_vph.size(); ++i) {
    for (const auto& m : s.demand_slots[i]) {
      demand[m] = vph(slot_vph[i] * beta);
    }
  }
  return demand;
}

}  // namespace cmat
