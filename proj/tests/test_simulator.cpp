#include <doctest.h>

#include <cmat/baselines.hpp>
#include <cmat/milp_model.hpp>
#include <cmat/milp_solver.hpp>
#include <cmat/scenarios.hpp>
#include <cmat/schedule.hpp>
#include <cmat/simulator.hpp>

#include <cmath>
#include <stdexcept>

using namespace cmat;

namespace {

CyclicSchedule single_m1_schedule(double eb_vph, double nb_vph) {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  DemandMap d{{"EB", vph(eb_vph)}, {"NB", vph(nb_vph)}};
  auto build = build_m1(s.graph, d, params);
  auto sol = solve_milp(build.instance);
  REQUIRE(sol.status == MilpStatus::optimal);
  return extract_schedule(sol, build, s.graph);
}

}  // namespace

TEST_CASE("balanced schedule serves its demand within a cycle of delay") {
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  auto sched = single_m1_schedule(1000, 1000);
  DemandMap d{{"EB", vph(1000)}, {"NB", vph(1000)}};

  auto m = simulate(sched, g, d, {});
  CHECK(m.throughput_vph == doctest::Approx(2000.0).epsilon(0.01));
  CHECK(m.mean_delay_s <= 7.2);
  CHECK(m.mean_delay_s > 0.0);
  // arrivals never outgrow one platoon
  for (const auto& [pid, mm] : m.per_movement) {
    CHECK(mm.max_queue <= 2);
    CHECK(mm.residual_queue <= 2);
  }
}

TEST_CASE("unit platoons cap the rotation at its service rate") {
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  CmatParameters params;
  auto sched = rc_schedule(g, params);
  DemandMap d{{"EB", vph(1800)}, {"NB", vph(1800)}};

  auto m = simulate(sched, g, d, {});
  // one vehicle per movement per 4.5 s rotation
  CHECK(m.throughput_vph == doctest::Approx(1600.0).epsilon(0.02));
  CHECK(m.per_movement.at("EB").throughput_vph ==
        doctest::Approx(800.0).epsilon(0.02));
  // the surplus piles up
  CHECK(m.residual_queue > 500);
  CHECK(m.mean_delay_s > 100.0);
}

TEST_CASE("zero demand leaves a movement silent") {
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  DemandMap d{{"EB", vph(1000)}, {"NB", 0.0}};
  auto build = build_m1(s.graph, d, params);
  auto sol = solve_milp(build.instance);
  REQUIRE(sol.status == MilpStatus::optimal);
  auto sched = extract_schedule(sol, build, s.graph);

  auto m = simulate(sched, g, d, {});
  CHECK(m.per_movement.at("NB").throughput_vph == 0.0);
  CHECK(m.per_movement.at("NB").arrivals == 0);
  CHECK(m.per_movement.at("EB").throughput_vph ==
        doctest::Approx(1000.0).epsilon(0.01));
}

TEST_CASE("every vehicle is accounted for") {
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  auto sched = single_m1_schedule(1000, 1000);
  DemandMap d{{"EB", vph(1800)}, {"NB", vph(1500)}};  // overload it

  SimTrace trace;
  auto m = simulate(sched, g, d, {}, &trace);
  for (const auto& [pid, mm] : m.per_movement) {
    CHECK(mm.arrivals == mm.served + mm.residual_queue);
    CHECK(mm.completed <= mm.served);
    CHECK(mm.counted <= mm.completed);

    // FIFO at the saturation headway
    const auto& dep = trace.departures.at(pid);
    REQUIRE(static_cast<long>(dep.size()) == mm.arrivals);
    for (std::size_t i = 1; i < dep.size(); ++i) {
      CHECK(dep[i] - dep[i - 1] >= 1.25 - 1e-9);
    }
  }
}

TEST_CASE("a backlogged movement departs exactly its platoon per cycle") {
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  auto sched = single_m1_schedule(1000, 1000);  // L = 2, C = 7.2
  DemandMap d{{"EB", vph(2400)}, {"NB", vph(2400)}};

  SimConfig base;
  base.warmup_s = 120.0;
  base.horizon_s = 720.0;
  SimConfig longer = base;
  longer.horizon_s = 720.0 + 10 * 7.2;

  auto a = simulate(sched, g, d, base);
  auto b = simulate(sched, g, d, longer);
  for (const auto& pid : {"EB", "NB"}) {
    CHECK(b.per_movement.at(pid).served - a.per_movement.at(pid).served == 20);
  }
}

TEST_CASE("seeded arrivals reproduce and stay near the mean") {
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  auto sched = single_m1_schedule(1000, 1000);
  DemandMap d{{"EB", vph(1000)}, {"NB", vph(1000)}};

  SimConfig cfg;
  cfg.arrivals = ArrivalModel::poisson;
  cfg.seed = 7;
  auto a = simulate(sched, g, d, cfg);
  auto b = simulate(sched, g, d, cfg);
  CHECK(a.throughput_vph == b.throughput_vph);
  CHECK(a.mean_delay_s == b.mean_delay_s);
  CHECK(a.throughput_vph == doctest::Approx(2000.0).epsilon(0.10));

  cfg.seed = 8;
  auto c = simulate(sched, g, d, cfg);
  CHECK(c.throughput_vph != a.throughput_vph);
}

TEST_CASE("fixed-time plan serves an undersaturated crossing") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  auto cfg = default_tsc_config(s, params);
  DemandMap d{{"EB", 0.24}, {"NB", 0.24}};  // 864 veh/h each
  auto plan = webster_plan(s.graph, d, params, cfg);

  auto m = simulate(plan, s.graph, d, {});
  CHECK(m.throughput_vph == doctest::Approx(2.0 * 864.0).epsilon(0.02));
  CHECK(m.mean_delay_s > 0.0);
  CHECK(m.mean_delay_s < plan.cycle);
}

TEST_CASE("paired signals pass the corridor stream with the offset") {
  auto s = build_scenario(ScenarioKind::connected_pair);
  CmatParameters params;
  params.tau_star = 30.0;
  auto cfg = default_tsc_config(s, params);
  auto d = scale_demand(s, {500, 1000, 500}, 0.5);
  auto plan = webster_plan(s.graph, d, params, cfg);

  auto m = simulate(plan, s.graph, d, {});
  double total = 0.0;
  for (const auto& [pid, q] : d) total += q;
  CHECK(m.throughput_vph == doctest::Approx(total * 3600.0).epsilon(0.03));
  for (const auto& [pid, mm] : m.per_movement) {
    CHECK(mm.arrivals == mm.served + mm.residual_queue);
  }
}

TEST_CASE("bad inputs are rejected") {
  auto g = build_scenario(ScenarioKind::single_conflict).graph;
  auto sched = single_m1_schedule(1000, 1000);
  DemandMap d{{"EB", vph(1000)}, {"NB", vph(1000)}};

  SimConfig cfg;
  cfg.warmup_s = 3600.0;
  CHECK_THROWS_AS(simulate(sched, g, d, cfg), std::invalid_argument);

  DemandMap bad{{"XX", 0.1}};
  CHECK_THROWS_AS(simulate(sched, g, bad, {}), std::invalid_argument);
}
