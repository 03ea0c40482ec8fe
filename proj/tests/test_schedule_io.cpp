#include <doctest.h>

#include <cmat/baselines.hpp>
#include <cmat/milp_model.hpp>
#include <cmat/milp_solver.hpp>
#include <cmat/scenarios.hpp>
#include <cmat/schedule.hpp>
#include <cmat/schedule_io.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

using namespace cmat;

namespace {

CyclicSchedule balanced_schedule() {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  DemandMap d{{"EB", vph(1000)}, {"NB", vph(1000)}};
  auto build = build_m1(s.graph, d, params);
  auto sol = solve_milp(build.instance);
  REQUIRE(sol.status == MilpStatus::optimal);
  return extract_schedule(sol, build, s.graph);
}

void check_same(const CyclicSchedule& a, const CyclicSchedule& b) {
  CHECK(a.cycle == b.cycle);
  REQUIRE(a.movements.size() == b.movements.size());
  for (const auto& [pid, t] : a.movements) {
    const auto& u = b.movements.at(pid);
    CHECK(t.red == u.red);
    CHECK(t.green == u.green);
    CHECK(t.platoon == u.platoon);
    CHECK(t.offset == u.offset);
    CHECK(t.occupancy == u.occupancy);
  }
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (const auto& [nid, t] : a.nodes) {
    const auto& u = b.nodes.at(nid);
    CHECK(t.first == u.first);
    CHECK(t.second == u.second);
    CHECK(t.tau_lead == u.tau_lead);
    CHECK(t.tau_wrap == u.tau_wrap);
    CHECK(t.z == u.z);
  }
  CHECK(a.arrivals == b.arrivals);
  CHECK(a.params.flow.v_f == b.params.flow.v_f);
  CHECK(a.params.tau_star == b.params.tau_star);
  CHECK(a.params.lambda == b.params.lambda);
  CHECK(a.params.c_bar == b.params.c_bar);
}

}  // namespace

TEST_CASE("cyclic schedule round-trips bit for bit") {
  auto sched = balanced_schedule();
  const std::string text = to_json(sched);
  auto back = controller_from_json(text);
  REQUIRE(std::holds_alternative<CyclicSchedule>(back));
  check_same(sched, std::get<CyclicSchedule>(back));
  // canonical form is stable under reserialization
  CHECK(to_json(std::get<CyclicSchedule>(back)) == text);
}

TEST_CASE("rotation schedule round-trips") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  auto sched = rc_schedule(s.graph, params);
  auto back = controller_from_json(to_json(sched));
  REQUIRE(std::holds_alternative<CyclicSchedule>(back));
  check_same(sched, std::get<CyclicSchedule>(back));
}

TEST_CASE("fixed-time plan round-trips across two intersections") {
  auto s = build_scenario(ScenarioKind::connected_pair);
  CmatParameters params;
  params.tau_star = 30.0;
  auto cfg = default_tsc_config(s, params);
  auto plan =
      webster_plan(s.graph, scale_demand(s, {500, 1000, 500}, 0.6), params, cfg);

  auto back = controller_from_json(to_json(plan));
  REQUIRE(std::holds_alternative<SignalPlan>(back));
  const auto& q = std::get<SignalPlan>(back);
  CHECK(q.cycle == plan.cycle);
  CHECK(q.params.tau_star == 30.0);
  REQUIRE(q.intersections.size() == plan.intersections.size());
  for (size_t i = 0; i < plan.intersections.size(); ++i) {
    const auto& a = plan.intersections[i];
    const auto& b = q.intersections[i];
    CHECK(a.id == b.id);
    CHECK(a.offset == b.offset);
    CHECK(a.nodes == b.nodes);
    REQUIRE(a.phases.size() == b.phases.size());
    for (size_t f = 0; f < a.phases.size(); ++f) {
      CHECK(a.phases[f].movements == b.phases[f].movements);
      CHECK(a.phases[f].green == b.phases[f].green);
      CHECK(a.phases[f].lost == b.phases[f].lost);
    }
  }
  CHECK(plan_issues(q, s.graph).empty());
  CHECK(to_json(q) == to_json(plan));
}

TEST_CASE("controllers survive a trip through a file") {
  auto dir = std::filesystem::temp_directory_path() / "cmat_io_test";
  std::filesystem::create_directories(dir);

  auto sched = balanced_schedule();
  write_controller(sched, dir / "sched.json");
  auto back = read_controller(dir / "sched.json");
  REQUIRE(std::holds_alternative<CyclicSchedule>(back));
  check_same(sched, std::get<CyclicSchedule>(back));

  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  auto cfg = default_tsc_config(s, params);
  auto plan =
      webster_plan(s.graph, DemandMap{{"EB", 0.24}, {"NB", 0.24}}, params, cfg);
  write_controller(plan, dir / "plan.json");
  auto back2 = read_controller(dir / "plan.json");
  REQUIRE(std::holds_alternative<SignalPlan>(back2));
  CHECK(std::get<SignalPlan>(back2).cycle == plan.cycle);

  CHECK_THROWS_AS(read_controller(dir / "nope.json"), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("invalid schedule files name the offending field") {
  auto sched = balanced_schedule();
  const std::string good = to_json(sched);

  auto expect_mention = [](const std::string& text, const std::string& needle) {
    try {
      controller_from_json(text);
      FAIL_CHECK("expected a parse failure mentioning " << needle);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  expect_mention("this is not json", "JSON");
  expect_mention(R"({"format": "something-else"})", "format");
  expect_mention(R"({"format": "cmat-schedule", "version": 2})", "version");
  expect_mention(
      R"({"format": "cmat-schedule", "version": 1, "type": "mystery"})", "type");

  std::string no_cycle = good;
  auto at = no_cycle.find("\"cycle\"");
  no_cycle.replace(at, 7, "\"cycl\"");
  expect_mention(no_cycle, "cycle");

  std::string bad_platoon = good;
  at = bad_platoon.find("\"platoon\": 2");
  REQUIRE(at != std::string::npos);
  bad_platoon.replace(at, 12, "\"platoon\": 2.5");
  expect_mention(bad_platoon, "platoon");

  std::string bad_z = good;
  at = bad_z.find("\"z\": ");
  REQUIRE(at != std::string::npos);
  bad_z.replace(at, 13, "\"z\": \"yes\" ");
  expect_mention(bad_z, ".z");
}
