#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "hybridvr/csv_io.hpp"
#include "hybridvr/errors.hpp"

using namespace hybridvr;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "hybridvr_csv_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scalar flux round-trips exactly") {
  const ProblemModel m = builtin_problem("box_scatter");
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1e-3);
  ScalarFluxField phi(m.mesh.cell_count(), m.n_groups());
  for (auto& v : phi.values()) v = u(gen) * u(gen);
  const auto path = scratch("flux.csv");
  write_scalar_flux(path, phi, m.mesh);
  CHECK(read_scalar_flux(path, m.mesh, m.n_groups()) == phi);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "i,j,group,value");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == m.mesh.cell_count() * m.n_groups());
}

TEST_CASE("solver flux round-trips exactly") {
  const ProblemModel m = builtin_problem("box_scatter");
  const QuadratureSet q = build_quadrature(2, 2);
  const SolveResult r = solve(m, q, TransportMode::adjoint);
  const auto path = scratch("adjoint.csv");
  write_scalar_flux(path, r.scalar, m.mesh);
  CHECK(read_scalar_flux(path, m.mesh, m.n_groups()) == r.scalar);

  const auto ang = scratch("adjoint_angular.csv");
  write_angular_flux(ang, r.angular, m.mesh);
  std::ifstream in(ang);
  std::string header;
  std::getline(in, header);
  CHECK(header == "i,j,group,dir,value");
}

TEST_CASE("importance map files round-trip exactly") {
  const ProblemModel m = builtin_problem("box_scatter");
  VrOptions o;
  o.method = VrMethod::cadis_omega;
  o.rho = 4.5;
  const VrResult r = make_vr(m, build_quadrature(2, 2), o);
  const auto prefix = scratch("map").string();
  write_weight_windows(ww_path(prefix), r.map);
  write_biased_source(biased_source_path(prefix), r.map);
  const ImportanceMap back = read_importance_map(ww_path(prefix), biased_source_path(prefix));
  CHECK(back == r.map);

  const std::string ww = slurp(ww_path(prefix));
  CHECK(ww.rfind("# method=cadis_omega R=", 0) == 0);
  CHECK(ww.find("\ni,j,group,w_low,w_surv,w_high\n") != std::string::npos);
  const std::string src = slurp(biased_source_path(prefix));
  CHECK(src.find("\ni,j,group,q_hat,w0\n") != std::string::npos);
}

TEST_CASE("malformed map files are rejected") {
  const auto ww = scratch("bad.ww.csv");
  const auto src = scratch("bad.src.csv");
  std::ofstream(ww) << "# method=cadis R=1 rho=5 nx=1 ny=1 groups=1\ni,j,group,w_low,w_surv,w_high\n"
                       "0,0,0,1,2\n";
  std::ofstream(src) << "# method=cadis R=1 rho=5 nx=1 ny=1 groups=1\ni,j,group,q_hat,w0\n";
  CHECK_THROWS_AS(read_importance_map(ww, src), ParseError);

  std::ofstream(ww) << "# method=cadis R=1 rho=5 nx=1 ny=1 groups=1\ni,j,group,w_low,w_surv,w_high\n"
                       "3,0,0,1,2,3\n";
  CHECK_THROWS_AS(read_importance_map(ww, src), ParseError);

  std::ofstream(ww) << "i,j,group,w_low,w_surv,w_high\n";
  CHECK_THROWS_AS(read_importance_map(ww, src), ParseError);

  std::ofstream(ww) << "# method=cadis R=1 rho=5 nx=2 ny=1 groups=1\ni,j,group,w_low,w_surv,w_high\n";
  CHECK_THROWS_AS(read_importance_map(ww, src), ParseError);
  CHECK_THROWS_AS(read_importance_map(scratch("missing.ww.csv"), src), ParseError);
}

TEST_CASE("tally csv layout") {
  Tally t;
  t.groups = 2;
  t.mean = {1.5, 0.0};
  t.rel_err = {0.25, 0.0};
  t.scored = {true, false};
  t.total_mean = 1.5;
  t.total_rel_err = 0.25;
  t.total_scored = true;
  t.histories = 1000;
  t.time_minutes = 2.0;
  CHECK(tally_to_csv(t, false) ==
        "group,mean,rel_err\n0,1.5,0.25\n1,0,nan\ntotal,1.5,0.25\nhistories,1000\n");
  CHECK(tally_to_csv(t, true) ==
        "group,mean,rel_err\n0,1.5,0.25\n1,0,nan\ntotal,1.5,0.25\nhistories,1000\n"
        "time_minutes,2\nfom,8\n");
}

TEST_CASE("format_double keeps every bit") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -2.5}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}
