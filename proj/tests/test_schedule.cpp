#include <doctest.h>

#include <cmat/milp_model.hpp>
#include <cmat/milp_solver.hpp>
#include <cmat/scenarios.hpp>
#include <cmat/schedule.hpp>

#include <cmath>
#include <stdexcept>

using namespace cmat;

namespace {

DemandMap single_demand(double eb_vph, double nb_vph) {
  return {{"EB", vph(eb_vph)}, {"NB", vph(nb_vph)}};
}

struct Solved {
  ModelBuild build;
  MilpSolution sol;
  CyclicSchedule sched;
};

Solved solve_single_m1(double eb_vph, double nb_vph) {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  Solved out;
  out.build = build_m1(s.graph, single_demand(eb_vph, nb_vph), params);
  out.sol = solve_milp(out.build.instance);
  REQUIRE(out.sol.status == MilpStatus::optimal);
  out.sched = extract_schedule(out.sol, out.build, s.graph);
  return out;
}

}  // namespace

TEST_CASE("balanced demand schedule matches the hand solution") {
  auto r = solve_single_m1(1000, 1000);
  const auto& s = r.sched;

  CHECK(s.cycle == doctest::Approx(7.2).epsilon(1e-9));
  REQUIRE(s.movements.size() == 2);
  for (const auto& pid : {"EB", "NB"}) {
    const auto& t = s.movements.at(pid);
    CHECK(t.platoon == 2);
    CHECK(t.occupancy == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(t.red + t.green == doctest::Approx(s.cycle).epsilon(1e-9));
    // release window sized for the platoon at saturation flow
    CHECK(t.green == doctest::Approx(2.5).epsilon(1e-9));
  }
  const auto& n = s.nodes.at("c_EB_NB");
  CHECK(n.tau_lead + n.tau_wrap == doctest::Approx(4.2).epsilon(1e-9));
  CHECK(n.tau_lead >= 2.0 - 1e-9);
  CHECK(n.tau_wrap >= 2.0 - 1e-9);
  CHECK(n.first != n.second);
}

TEST_CASE("imbalanced demand schedule matches the hand solution") {
  auto r = solve_single_m1(1800, 100);
  const auto& s = r.sched;

  CHECK(s.cycle == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(s.movements.at("EB").platoon == 5);
  CHECK(s.movements.at("NB").platoon == 1);
  CHECK(s.movements.at("EB").occupancy == doctest::Approx(5.25).epsilon(1e-9));
  CHECK(s.movements.at("NB").occupancy == doctest::Approx(0.25).epsilon(1e-9));
  const auto& n = s.nodes.at("c_EB_NB");
  CHECK(n.tau_lead + n.tau_wrap == doctest::Approx(4.5).epsilon(1e-9));
}

TEST_CASE("unit-platoon schedule has the minimal rotation") {
  // both movements under the muting threshold, so L is pinned to 1 and the
  // cheapest rotation is two clearances plus two body passages
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  auto build = build_m2(s.graph, single_demand(120, 120), params);
  REQUIRE(build.muted.size() == 2);
  auto sol = solve_milp(build.instance);
  REQUIRE(sol.status == MilpStatus::optimal);
  auto sched = extract_schedule(sol, build, s.graph);

  CHECK(sched.cycle == doctest::Approx(4.5).epsilon(1e-9));
  for (const auto& pid : {"EB", "NB"}) {
    CHECK(sched.movements.at(pid).platoon == 1);
    CHECK(sched.movements.at(pid).occupancy ==
          doctest::Approx(0.25).epsilon(1e-9));
  }
}

TEST_CASE("extraction rejects a solve without a feasible point") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  DemandMap d{{"EB", params.flow.q_max()}, {"NB", params.flow.q_max()}};
  auto build = build_m1(s.graph, d, params);
  auto sol = solve_milp(build.instance);
  REQUIRE(sol.status == MilpStatus::infeasible);
  CHECK_THROWS_AS(extract_schedule(sol, build, s.graph),
                  std::invalid_argument);
}

TEST_CASE("timeline periodicity and alternation") {
  auto r = solve_single_m1(1000, 1000);
  const auto& s = r.sched;
  const int k = 6;
  auto tl = expand_timeline(s, k);
  const auto& list = tl.by_node.at("c_EB_NB");
  REQUIRE(list.size() == 2 * k);

  // every interval repeats exactly one cycle later
  for (std::size_t i = 0; i + 2 < list.size(); ++i) {
    CHECK(list[i + 2].start - list[i].start ==
          doctest::Approx(s.cycle).epsilon(1e-12));
    CHECK(list[i + 2].movement == list[i].movement);
  }
  // labels alternate between the two movements throughout
  for (std::size_t i = 0; i + 1 < list.size(); ++i) {
    CHECK(list[i].movement != list[i + 1].movement);
  }
  // the order bit picks who leads
  const auto& n = s.nodes.at("c_EB_NB");
  CHECK(list[0].movement == n.first);
  CHECK(list[1].movement == n.second);
}

TEST_CASE("safety holds for solver outputs") {
  for (auto [eb, nb] : {std::pair{1000.0, 1000.0}, {1800.0, 100.0}}) {
    auto r = solve_single_m1(eb, nb);
    auto report = verify_safety(r.sched, build_scenario(
        ScenarioKind::single_conflict).graph);
    CHECK(report.ok());
  }
}

TEST_CASE("cycle count does not change the verdict") {
  auto r = solve_single_m1(1000, 1000);
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  auto a = verify_safety(r.sched, g, 3);
  auto b = verify_safety(r.sched, g, 10);
  CHECK(a.ok());
  CHECK(b.ok());
  CHECK(a.violations.size() == b.violations.size());
  CHECK_THROWS_AS(verify_safety(r.sched, g, 2), std::invalid_argument);
}

TEST_CASE("squeezed clearance gap is flagged in every cycle") {
  auto r = solve_single_m1(1000, 1000);
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  auto s = r.sched;

  // pull the trailing movement forward until only tau_c / 2 is left in
  // front of it, keeping its own arrival identity intact
  auto& n = s.nodes.at("c_EB_NB");
  const double shift = n.tau_lead - s.params.flow.tau_c / 2.0;
  REQUIRE(shift > 0.0);
  s.movements.at(n.second).offset -= shift;
  for (auto& [node, arr] : s.arrivals.at(n.second)) arr -= shift;
  n.tau_lead -= shift;
  n.tau_wrap += shift;

  const int k = 5;
  auto report = verify_safety(s, g, k);
  REQUIRE_FALSE(report.ok());
  int clearance = 0;
  for (const auto& v : report.violations) {
    if (v.what == "clearance") {
      ++clearance;
      CHECK(v.node == "c_EB_NB");
      CHECK(v.value == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(v.required == doctest::Approx(2.0));
    }
  }
  CHECK(clearance == k);  // once per cycle
}

TEST_CASE("broken in-platoon spacing is flagged") {
  auto r = solve_single_m1(1000, 1000);
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  auto s = r.sched;
  s.movements.at("EB").occupancy += 0.3;

  auto report = verify_safety(s, g);
  REQUIRE_FALSE(report.ok());
  bool spacing = false;
  for (const auto& v : report.violations) {
    if (v.what == "spacing" && v.movement == "EB") spacing = true;
  }
  CHECK(spacing);
}

TEST_CASE("resonance check on the hand solutions") {
  SUBCASE("balanced cycle lands on an integer count") {
    auto r = solve_single_m1(1000, 1000);
    auto res = check_prop1(r.sched, single_demand(1000, 1000), r.sched.params);
    CHECK(res.holds);
    CHECK(r.sched.cycle * vph(1000) == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("imbalanced cycle lands on an integer count") {
    auto r = solve_single_m1(1800, 100);
    auto res = check_prop1(r.sched, single_demand(1800, 100), r.sched.params);
    CHECK(res.holds);
    CHECK(r.sched.cycle * vph(1800) == doctest::Approx(5.0).epsilon(1e-9));
  }
  SUBCASE("an off-resonance cycle is caught") {
    auto r = solve_single_m1(1000, 1000);
    auto s = r.sched;
    s.cycle = 7.0;
    auto res = check_prop1(s, single_demand(1000, 1000), s.params);
    CHECK_FALSE(res.holds);
    CHECK(res.movement == "EB");
    CHECK(res.product == doctest::Approx(7.0 * vph(1000)).epsilon(1e-9));
  }
  SUBCASE("muted movements are exempt") {
    auto r = solve_single_m1(1800, 100);  // NB muted at 100 veh/h
    auto s = r.sched;
    s.cycle = 10.0;
    // NB alone would fail the integer test, but it is under the threshold
    CHECK(s.cycle * vph(100) == doctest::Approx(0.2778).epsilon(1e-3));
    auto res = check_prop1(s, single_demand(1800, 100), s.params);
    CHECK(res.holds);
  }
}
