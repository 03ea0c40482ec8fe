#include <doctest.h>

#include <cmat/lp_format.hpp>
#include <cmat/milp_model.hpp>
#include <cmat/scenarios.hpp>

#include <stdexcept>

using namespace cmat;

namespace {

DemandMap single_demand(double eb_vph, double nb_vph) {
  return {{"EB", vph(eb_vph)}, {"NB", vph(nb_vph)}};
}

int count_rows(const MilpInstance& mi, const std::string& prefix) {
  int c = 0;
  for (const auto& row : mi.rows()) {
    if (row.name.rfind(prefix, 0) == 0) ++c;
  }
  return c;
}

}  // namespace

TEST_CASE("single conflict instance has the documented shape") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  auto m1 = build_m1(s.graph, single_demand(1000, 1000), params);
  auto m2 = build_m2(s.graph, single_demand(1000, 1000), params);

  CHECK(m1.instance.variables().size() == 20);
  CHECK(m1.instance.rows().size() == 28);
  CHECK(m2.instance.rows().size() == 26);
  CHECK(count_rows(m1.instance, "c_serv_rate") == 2);
  CHECK(count_rows(m2.instance, "c_serv_rate") == 0);
  CHECK(count_rows(m1.instance, "c_rlt") == 16);
  CHECK(m1.muted.empty());
  CHECK(m1.warnings.empty());

  const auto& mi = m1.instance;
  auto var = [&](const std::string& n) { return mi.variables()[mi.index_of(n)]; };
  CHECK(var("C").ub == doctest::Approx(120.0));
  CHECK(var("L[EB]").lb == doctest::Approx(1.0));
  CHECK(var("L[EB]").ub == doctest::Approx(96.0));
  CHECK(var("L[EB]").kind == VarKind::integer);
  CHECK(var("T[EB]").lb == doctest::Approx(0.25));
  CHECK(var("T[EB]").ub == doctest::Approx(119.0));
  CHECK(var("tau1[c_EB_NB]").lb == doctest::Approx(2.0));
  CHECK(var("tau2[c_EB_NB]").ub == doctest::Approx(120.0));
  CHECK(var("tarr[EB,c_EB_NB]").ub == doctest::Approx(238.75));
  CHECK(var("toff[EB]").ub == doctest::Approx(120.0));
  CHECK(var("z[c_EB_NB]").kind == VarKind::binary);
  CHECK(var("xlo[c_EB_NB]").ub == doctest::Approx(238.75));
  CHECK(var("ylo[c_EB_NB]").ub == doctest::Approx(119.0));

  // objective: lambda on the cycle, -(1 - lambda) on each platoon size
  CHECK(mi.objective()[mi.index_of("C")] == doctest::Approx(0.9));
  CHECK(mi.objective()[mi.index_of("L[EB]")] == doctest::Approx(-0.1));
  CHECK(m2.instance.objective()[m2.instance.index_of("C")] ==
        doctest::Approx(0.1));
  CHECK(m2.instance.objective()[m2.instance.index_of("L[NB]")] ==
        doctest::Approx(-0.9));
}

TEST_CASE("four leg instance row census") {
  auto s = build_scenario(ScenarioKind::four_leg_dedicated);
  CmatParameters params;
  auto demand = scale_demand(s, {1000, 1000, 1000}, 1.0);
  auto m1 = build_m1(s.graph, demand, params);
  CHECK(m1.instance.variables().size() == 421);
  CHECK(m1.instance.rows().size() == 848);
  CHECK(m1.muted.empty());
}

TEST_CASE("thin demand mutes a movement") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  auto demand = single_demand(1800, 100);  // 1/q = 36 s > tau_star
  auto muted = muted_set(s.graph, demand, params);
  CHECK(muted == std::set<std::string>{"NB"});

  auto m1 = build_m1(s.graph, demand, params);
  const auto& mi = m1.instance;
  CHECK(m1.muted == muted);
  CHECK(mi.variables()[mi.index_of("L[NB]")].ub == doctest::Approx(1.0));
  CHECK(mi.variables()[mi.index_of("L[EB]")].ub == doctest::Approx(96.0));
  CHECK(count_rows(mi, "c_platoon_size") == 1);
  CHECK(count_rows(mi, "c_serv_rate") == 1);
  // the muted platoon still shows up in the objective
  CHECK(mi.objective()[mi.index_of("L[NB]")] == doctest::Approx(-0.1));
}

TEST_CASE("muting comparison is exact at the boundary") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  params.tau_star = 8.0;
  DemandMap d{{"EB", 0.125}, {"NB", 0.125}};  // 1/q exactly tau_star
  CHECK(muted_set(s.graph, d, params).empty());
  DemandMap thin{{"EB", 0.0625}, {"NB", 0.125}};
  CHECK(muted_set(s.graph, thin, params) == std::set<std::string>{"EB"});
}

TEST_CASE("zero and missing demand mean muted") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  DemandMap d{{"EB", vph(1000)}};  // NB absent
  CHECK(muted_set(s.graph, d, params) == std::set<std::string>{"NB"});
  d["NB"] = 0.0;
  CHECK(muted_set(s.graph, d, params) == std::set<std::string>{"NB"});
  d["NB"] = -0.1;
  CHECK_THROWS_AS(muted_set(s.graph, d, params), std::invalid_argument);
}

TEST_CASE("oversaturated demand is clamped with a warning") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  DemandMap d{{"EB", 1.0}, {"NB", vph(1000)}};  // 1.0 veh/s > q_max
  auto m1 = build_m1(s.graph, d, params);
  REQUIRE(m1.warnings.size() == 1);
  CHECK(m1.warnings[0].find("EB") != std::string::npos);
  // the service-rate row uses the clamped rate
  for (const auto& row : m1.instance.rows()) {
    if (row.name == "c_serv_rate[EB]") {
      CHECK(row.terms[0].coeff == doctest::Approx(0.8));
    }
  }
}

TEST_CASE("headway and product rows carry the right coefficients") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  auto m1 = build_m1(s.graph, single_demand(1000, 1000), params);
  const auto& mi = m1.instance;

  bool saw_headway = false;
  bool saw_rlt3 = false;
  for (const auto& row : mi.rows()) {
    if (row.name == "c_headway[c_EB_NB]") {
      saw_headway = true;
      REQUIRE(row.terms.size() == 8);
      CHECK(row.sense == RowSense::eq);
      CHECK(row.rhs == doctest::Approx(0.0));
      CHECK(row.terms[0].var == mi.index_of("tau1[c_EB_NB]"));
      CHECK(row.terms[1].coeff == doctest::Approx(-1.0));  // tarr[EB,...]
      CHECK(row.terms[4].var == mi.index_of("xhi[c_EB_NB]"));
      CHECK(row.terms[4].coeff == doctest::Approx(-2.0));
    }
    if (row.name == "c_rlt3[c_EB_NB,xlo]") {
      saw_rlt3 = true;
      REQUIRE(row.terms.size() == 3);
      CHECK(row.sense == RowSense::ge);
      CHECK(row.rhs == doctest::Approx(-238.75));
      CHECK(row.terms[2].var == mi.index_of("z[c_EB_NB]"));
      CHECK(row.terms[2].coeff == doctest::Approx(-238.75));
    }
  }
  CHECK(saw_headway);
  CHECK(saw_rlt3);
}

TEST_CASE("m2 precondition diagnostics") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;

  // healthy: rates at 0.02 veh/s mean a 50 s minimum cycle
  DemandMap d{{"EB", 0.02}, {"NB", 0.02}};
  auto ok = check_m2_precondition(s.graph, d, params);
  CHECK(ok.ok);
  CHECK(ok.min_cycle == doctest::Approx(50.0));

  // cycle cap below the geometric floor
  CmatParameters tight = params;
  tight.c_bar = 3.0;
  auto bad1 = check_m2_precondition(s.graph, single_demand(1000, 1000), tight);
  CHECK_FALSE(bad1.ok);
  CHECK(bad1.min_cycle == doctest::Approx(4.5));

  // muting threshold above what the minimum cycle can absorb
  CmatParameters lazy = params;
  lazy.tau_star = 60.0;
  auto bad2 = check_m2_precondition(s.graph, d, lazy);
  CHECK_FALSE(bad2.ok);
  REQUIRE(bad2.failures.size() == 1);
  CHECK(bad2.failures[0].find("tau_star") != std::string::npos);
}

TEST_CASE("feasible start solves the single conflict exactly") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  auto demand = single_demand(1000, 1000);
  auto fs = feasible_start(s.graph, demand, params);
  REQUIRE(fs.ok);

  auto m2 = build_m2(s.graph, demand, params);
  const auto& mi = m2.instance;
  REQUIRE(fs.x.size() == mi.variables().size());
  CHECK(satisfies(mi, fs.x));
  auto at = [&](const std::string& n) { return fs.x[mi.index_of(n)]; };
  CHECK(at("C") == doctest::Approx(4.5));
  CHECK(at("toff[EB]") == doctest::Approx(0.0));
  CHECK(at("toff[NB]") == doctest::Approx(2.25));
  CHECK(at("tau1[c_EB_NB]") == doctest::Approx(2.0));
  CHECK(at("tau2[c_EB_NB]") == doctest::Approx(2.0));
  CHECK(at("L[EB]") == doctest::Approx(1.0));
}

TEST_CASE("feasible start handles the staggered T") {
  auto s = t_intersection();
  CmatParameters params;
  DemandMap d{{"p1", 0.25}, {"p2", 0.25}, {"p3", 0.25}};
  auto fs = feasible_start(s.graph, d, params);
  REQUIRE(fs.ok);
  auto m2 = build_m2(s.graph, d, params);
  CHECK(satisfies(m2.instance, fs.x));
  auto at = [&](const std::string& n) { return fs.x[m2.instance.index_of(n)]; };
  CHECK(at("toff[p2]") == doctest::Approx(2.25));
  CHECK(at("toff[p3]") == doctest::Approx(2.25 + 20.0 / 18.0));
}

TEST_CASE("feasible start reports inconsistent offset systems") {
  auto s = build_scenario(ScenarioKind::four_leg_dedicated);
  CmatParameters params;
  auto demand = scale_demand(s, {1000, 1000, 1000}, 1.0);
  auto fs = feasible_start(s.graph, demand, params);
  CHECK_FALSE(fs.ok);
  CHECK(fs.detail.find("inconsistent") != std::string::npos);
}

TEST_CASE("cycle cap below the floor fails the start") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  params.c_bar = 3.0;
  auto fs = feasible_start(s.graph, single_demand(1000, 1000), params);
  CHECK_FALSE(fs.ok);
  CHECK(fs.detail.find("cycle cap") != std::string::npos);
}

TEST_CASE("lp export renders all sections") {
  auto s = build_scenario(ScenarioKind::single_conflict);
  CmatParameters params;
  auto m1 = build_m1(s.graph, single_demand(1800, 100), params);
  auto text = to_lp_format(m1.instance);
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
  CHECK(text.find("Generals") != std::string::npos);
  CHECK(text.find("Binaries") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
  // names survive sanitizing; muted platoon is pinned to one
  CHECK(text.find("c_serv_rate_EB") != std::string::npos);
  CHECK(text.find("L_NB = 1") != std::string::npos);
  // no raw brackets remain
  CHECK(text.find('[') == std::string::npos);
}
