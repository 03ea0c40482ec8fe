#include <doctest.h>

#include <cmat/conflict_graph.hpp>
#include <cmat/scenarios.hpp>

#include <set>
#include <stdexcept>

using namespace cmat;

namespace {

ConflictGraph tiny_graph() {
  return ConflictGraph(
      {{"n1", NodeKind::crossing}, {"n2", NodeKind::crossing}},
      {{"n1", "n2", 20.0}},
      {{"p1", {"n1", "n2"}, MovementKind::through},
       {"p2", {"n1"}, MovementKind::left},
       {"p3", {"n2"}, MovementKind::left}});
}

}  // namespace

TEST_CASE("accessors keep deterministic order") {
  ConflictGraph g({{"b"}, {"a"}},
                  {},
                  {{"mz", {"a"}}, {"ma", {"a"}}, {"mk", {"b"}}, {"mb", {"b"}}});
  CHECK(g.nodes()[0].id == "a");
  CHECK(g.nodes()[1].id == "b");
  CHECK(g.movements()[0].id == "ma");
  CHECK(g.movements()[3].id == "mz");
  auto at_a = g.movements_at("a");
  REQUIRE(at_a.size() == 2);
  CHECK(at_a[0]->id == "ma");
  CHECK(at_a[1]->id == "mz");
  CHECK(g.find_node("a") != nullptr);
  CHECK(g.find_node("zz") == nullptr);
  CHECK(g.find_movement("mk") != nullptr);
}

TEST_CASE("validate_graph accepts the staggered T") {
  auto g = tiny_graph();
  auto report = validate_graph(g);
  CHECK(report.ok());
}

TEST_CASE("validate_graph flags structural defects") {
  SUBCASE("non-positive arc length") {
    ConflictGraph g({{"n1"}, {"n2"}}, {{"n1", "n2", 0.0}},
                    {{"p1", {"n1", "n2"}}, {"p2", {"n1"}}, {"p3", {"n2"}}});
    CHECK_FALSE(validate_graph(g).ok());
  }
  SUBCASE("node with only one movement") {
    ConflictGraph g({{"n1"}}, {}, {{"p1", {"n1"}}});
    CHECK_FALSE(validate_graph(g).ok());
  }
  SUBCASE("node with three movements") {
    ConflictGraph g({{"n1"}}, {},
                    {{"p1", {"n1"}}, {"p2", {"n1"}}, {"p3", {"n1"}}});
    CHECK_FALSE(validate_graph(g).ok());
  }
  SUBCASE("pair sharing two nodes") {
    ConflictGraph g({{"n1"}, {"n2"}}, {{"n1", "n2", 20.0}},
                    {{"p1", {"n1", "n2"}}, {"p2", {"n1", "n2"}}});
    CHECK_FALSE(validate_graph(g).ok());
  }
  SUBCASE("movement over unknown node") {
    ConflictGraph g({{"n1"}}, {}, {{"p1", {"nx"}}, {"p2", {"n1"}}});
    CHECK_FALSE(validate_graph(g).ok());
  }
  SUBCASE("missing arc between consecutive nodes") {
    ConflictGraph g({{"n1"}, {"n2"}}, {},
                    {{"p1", {"n1", "n2"}}, {"p2", {"n1"}}, {"p3", {"n2"}}});
    CHECK_FALSE(validate_graph(g).ok());
  }
  SUBCASE("repeated node within a movement") {
    ConflictGraph g({{"n1"}, {"n2"}},
                    {{"n1", "n2", 20.0}, {"n2", "n1", 20.0}},
                    {{"p1", {"n1", "n2", "n1"}}, {"p2", {"n1"}}, {"p3", {"n2"}}});
    CHECK_FALSE(validate_graph(g).ok());
  }
}

TEST_CASE("travel_time accumulates arc lengths") {
  auto g = tiny_graph();
  const auto* p1 = g.find_movement("p1");
  REQUIRE(p1 != nullptr);
  CHECK(travel_time(g, *p1, "n1", 18.0) == doctest::Approx(0.0));
  CHECK(travel_time(g, *p1, "n2", 18.0) == doctest::Approx(20.0 / 18.0));
  CHECK_THROWS_AS(travel_time(g, *p1, "missing", 18.0), std::invalid_argument);
  const auto* p2 = g.find_movement("p2");
  CHECK_THROWS_AS(travel_time(g, *p2, "n2", 18.0), std::invalid_argument);
}

TEST_CASE("stock scenarios validate and have the expected shape") {
  struct Expect {
    ScenarioKind kind;
    std::size_t nodes, movements, slots;
  };
  const Expect table[] = {
      {ScenarioKind::single_conflict, 1, 2, 2},
      {ScenarioKind::four_leg_dedicated, 40, 12, 3},
      {ScenarioKind::four_leg_shared, 48, 16, 4},
      {ScenarioKind::connected_pair, 30, 14, 3},
  };
  for (const auto& e : table) {
    CAPTURE(to_string(e.kind));
    auto s = build_scenario(e.kind);
    CHECK(validate_graph(s.graph).ok());
    CHECK(s.graph.nodes().size() == e.nodes);
    CHECK(s.graph.movements().size() == e.movements);
    CHECK(s.demand_slots.size() == e.slots);
    CHECK(s.kind == e.kind);
    // every movement is fed by exactly one demand slot
    std::set<std::string> fed;
    for (const auto& slot : s.demand_slots) {
      for (const auto& m : slot) {
        CHECK(s.graph.find_movement(m) != nullptr);
        CHECK(fed.insert(m).second);
      }
    }
    CHECK(fed.size() == s.graph.movements().size());
    // intersection map covers every node
    for (const auto& n : s.graph.nodes()) {
      CHECK(s.node_intersection.count(n.id) == 1);
    }
    // phase groups only reference known movements and never pair two
    // movements that share a crossing conflict at that intersection
    // (conflicts elsewhere belong to the other intersection's signal)
    for (const auto& it : s.intersections) {
      for (const auto& phase : it.phases) {
        for (std::size_t i = 0; i < phase.movements.size(); ++i) {
          const auto* a = s.graph.find_movement(phase.movements[i]);
          REQUIRE(a != nullptr);
          for (std::size_t j = i + 1; j < phase.movements.size(); ++j) {
            const auto* b = s.graph.find_movement(phase.movements[j]);
            REQUIRE(b != nullptr);
            for (const auto& na : a->nodes) {
              for (const auto& nb : b->nodes) {
                if (na == nb && s.node_intersection.at(na) == it.id) {
                  CHECK(s.graph.find_node(na)->kind != NodeKind::crossing);
                }
              }
            }
          }
        }
      }
    }
  }
}

TEST_CASE("t_intersection helper matches the staggered layout") {
  auto s = t_intersection();
  CHECK(validate_graph(s.graph).ok());
  CHECK(s.graph.nodes().size() == 2);
  CHECK(s.graph.movements().size() == 3);
  const auto* p1 = s.graph.find_movement("p1");
  REQUIRE(p1 != nullptr);
  REQUIRE(p1->nodes.size() == 2);
  CHECK(p1->nodes[0] == "n1");
  CHECK(p1->nodes[1] == "n2");
  CHECK(s.graph.find_arc("n1", "n2") != nullptr);
  CHECK(s.graph.find_arc("n1", "n2")->length_m == doctest::Approx(20.0));
}

TEST_CASE("connected_pair splits nodes across two intersections") {
  auto s = build_scenario(ScenarioKind::connected_pair);
  int minor_nodes = 0;
  for (const auto& [node, home] : s.node_intersection) {
    if (home == "minor") ++minor_nodes;
  }
  CHECK(minor_nodes == 6);
  REQUIRE(s.intersections.size() == 2);
  CHECK(s.intersections[0].id == "major");
  CHECK(s.intersections[1].id == "minor");

  // the link between the intersections is one long arc
  const auto* et = s.graph.find_movement("ET");
  REQUIRE(et != nullptr);
  CHECK(travel_time(s.graph, *et, "c_ET_XL", 18.0) ==
        doctest::Approx((5 * 20.0 + 500.0) / 18.0));
  const auto* wl = s.graph.find_movement("WL");
  REQUIRE(wl != nullptr);
  CHECK(travel_time(s.graph, *wl, "c_NT_WL", 18.0) ==
        doctest::Approx(500.0 / 18.0));
}

TEST_CASE("geometry is configurable and validated") {
  GeometryParams geom;
  geom.internal_spacing_m = 10.0;
  geom.intersection_spacing_m = 250.0;
  auto s = build_scenario(ScenarioKind::connected_pair, geom);
  const auto* wl = s.graph.find_movement("WL");
  CHECK(travel_time(s.graph, *wl, "c_NT_WL", 18.0) ==
        doctest::Approx(250.0 / 18.0));

  GeometryParams bad;
  bad.internal_spacing_m = 0.0;
  CHECK_THROWS_AS(build_scenario(ScenarioKind::single_conflict, bad),
                  std::invalid_argument);
}

TEST_CASE("scale_demand expands slot vectors") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  auto d = scale_demand(s, {1000.0, 500.0}, 2.0);
  CHECK(d.at("EB") == doctest::Approx(2000.0 / 3600.0));
  CHECK(d.at("NB") == doctest::Approx(1000.0 / 3600.0));
  CHECK_THROWS_AS(scale_demand(s, {1000.0}, 1.0), std::invalid_argument);

  auto four = build_scenario(ScenarioKind::four_leg_shared);
  auto df = scale_demand(four, {500.0, 1000.0, 1000.0, 500.0}, 1.0);
  CHECK(df.size() == 16);
  CHECK(df.at("ER") == doctest::Approx(500.0 / 3600.0));
  CHECK(df.at("NT2") == doctest::Approx(1000.0 / 3600.0));
}

TEST_CASE("scenario kind round-trips through strings") {
  for (auto k : {ScenarioKind::single_conflict, ScenarioKind::four_leg_dedicated,
                 ScenarioKind::four_leg_shared, ScenarioKind::connected_pair}) {
    CHECK(scenario_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(scenario_kind_from_string("bogus"), std::invalid_argument);
}
