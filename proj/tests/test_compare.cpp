#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "hybridvr/compare.hpp"

using namespace hybridvr;

TEST_CASE("report rows follow the FOM definitions") {
  Tally t;
  t.groups = 1;
  t.mean = {2.0};
  t.rel_err = {0.1};
  t.scored = {true};
  t.total_mean = 2.0;
  t.total_rel_err = 0.1;
  t.total_scored = true;
  t.time_minutes = 4.0;
  const CompareRow analog = make_row("analog", t, 0.0, 0);
  CHECK(analog.fom_mc == doctest::Approx(25.0));
  CHECK(analog.fom_adjusted == analog.fom_mc);
  const CompareRow vr = make_row("cadis", t, 1.0, 1);
  CHECK(vr.fom_adjusted == doctest::Approx(20.0));
  CHECK(vr.fom_adjusted <= vr.fom_mc);
  CHECK(vr.sigma() == doctest::Approx(0.2));
}

TEST_CASE("compare runs all three methods with equal histories") {
  const ProblemModel m = builtin_problem("box_scatter");
  CompareOptions o;
  o.mc.histories = 20000;
  const CompareReport r = run_compare(m, build_quadrature(2, 2), o);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].method == "analog");
  CHECK(r.rows[1].method == "cadis");
  CHECK(r.rows[2].method == "cadis_omega");
  CHECK(r.row("analog").t_det == 0.0);
  CHECK(r.row("analog").fom_adjusted == r.row("analog").fom_mc);
  CHECK(r.row("cadis").deterministic_solves == 1);
  CHECK(r.row("cadis_omega").deterministic_solves == 2);
  for (const auto& row : r.rows) {
    CHECK(row.tally.histories == 20000);
    CHECK(row.fom_adjusted <= row.fom_mc);
  }
  const std::string groups = compare_groups_csv(r);
  CHECK(groups.rfind("method,group,mean,rel_err\n", 0) == 0);
  CHECK(groups.find("cadis_omega,total,") != std::string::npos);
  const std::string summary = compare_summary_csv(r);
  CHECK(summary.rfind("method,t_mc_min,t_det_min,fom_mc,fom_adjusted,total_mean,total_sigma\n", 0) == 0);
  CHECK(format_compare_table(r).find("cadis_omega") != std::string::npos);
  CHECK_THROWS_AS(r.row("nope"), std::out_of_range);
}
