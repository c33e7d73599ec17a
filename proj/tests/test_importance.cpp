#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "hybridvr/errors.hpp"
#include "hybridvr/importance.hpp"
#include "test_support.hpp"

using namespace hybridvr;
using hybridvr::test::rel_diff;

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

AngularFluxField random_field(int cells, int groups, int dirs, TransportMode sense,
                              std::mt19937_64& gen, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  AngularFluxField f(cells, groups, dirs, sense);
  for (int c = 0; c < cells; ++c)
    for (int g = 0; g < groups; ++g)
      for (int m = 0; m < dirs; ++m) f(c, g, m) = u(gen);
  return f;
}

// Two 1x1 cells, source S = 1 in the first.
ProblemModel two_cell_model() {
  ProblemModel m = test::slab_model(2, 1, 2.0, 1.0, {1.0}, {{0.0}});
  m.sources.push_back({SourceKind::cell_region, {0}, {1.0}, 1.0});
  m.detectors.push_back({"d", {1}, {1.0}});
  return m;
}

void check_map_invariants(const ImportanceMap& map, const ProblemModel& model) {
  const CellGroupField q = source_density(model);
  const double S = total_source_strength(model);
  const double vol = model.mesh.cell_volume();
  double norm = 0.0;
  for (int c = 0; c < map.cells(); ++c)
    for (int g = 0; g < map.groups; ++g) {
      norm += map.q_hat(c, g) * vol;
      if (q(c, g) > 0.0 && map.has_window(c, g)) {
        CHECK(rel_diff(map.q_hat(c, g) * map.w0(c, g), q(c, g) / S) <= 1e-12);
        CHECK(rel_diff(map.w0(c, g), map.w_surv(c, g)) <= 1e-12);
      }
      if (map.has_window(c, g)) {
        CHECK(0.0 < map.w_low(c, g));
        CHECK(map.w_low(c, g) < map.w_surv(c, g));
        CHECK(map.w_surv(c, g) < map.w_high(c, g));
        CHECK(rel_diff(map.w_high(c, g), map.rho * map.w_low(c, g)) <= 1e-15);
      }
    }
  CHECK(std::abs(norm - 1.0) <= 1e-12);
}

}  // namespace

TEST_CASE("method and objective names") {
  CHECK(parse_vr_method("cadis-omega") == VrMethod::cadis_omega);
  CHECK(parse_vr_method("cadis_omega") == VrMethod::cadis_omega);
  CHECK(parse_vr_method("fw-cadis") == VrMethod::fw_cadis);
  CHECK(!parse_vr_method("magic"));
  CHECK(parse_fw_objective("dose-space") == FwObjective::dose_space);
  CHECK(!parse_fw_objective("dose"));
}

TEST_CASE("contributon_scalar") {
  const QuadratureSet q = build_quadrature(2, 2);
  const int M = q.size();
  AngularFluxField f(3, 2, M, TransportMode::forward);
  AngularFluxField zero(3, 2, M, TransportMode::adjoint);
  for (int c = 0; c < 3; ++c)
    for (int g = 0; g < 2; ++g)
      for (int m = 0; m < M; ++m) f(c, g, m) = 1.5;
  const ScalarFluxField none = contributon_scalar(f, zero, q);
  for (double v : none.values()) CHECK(v == 0.0);

  const ScalarFluxField sq = contributon_scalar(f, f, q);
  for (double v : sq.values()) CHECK(std::abs(v - kFourPi * 2.25) <= 1e-12 * kFourPi * 2.25);

  std::mt19937_64 gen(3);
  const auto a = random_field(3, 2, M, TransportMode::forward, gen);
  const auto b = random_field(3, 2, M, TransportMode::adjoint, gen);
  const ScalarFluxField r = contributon_scalar(a, b, q);
  for (int c = 0; c < 3; ++c)
    for (int g = 0; g < 2; ++g) {
      double oracle = 0.0;
      for (int m = 0; m < M; ++m) oracle += q.weight(m) * a(c, g, m) * b(c, g, m);
      CHECK(r(c, g) == oracle);
    }
}

TEST_CASE("omega_flux special cases") {
  const QuadratureSet q = build_quadrature(3, 2);
  const int M = q.size();
  std::mt19937_64 gen(11);
  const auto fwd = random_field(4, 2, M, TransportMode::forward, gen, 0.1, 2.0);

  AngularFluxField constant(4, 2, M, TransportMode::adjoint);
  for (int c = 0; c < 4; ++c)
    for (int g = 0; g < 2; ++g)
      for (int m = 0; m < M; ++m) constant(c, g, m) = 0.25 + c + 10.0 * g;
  const OmegaFluxField om = omega_flux(fwd, constant, q);
  for (int c = 0; c < 4; ++c)
    for (int g = 0; g < 2; ++g) {
      CHECK(!om.is_fallback(c, g));
      CHECK(std::abs(om.values(c, g) - (0.25 + c + 10.0 * g)) <= 1e-12 * (0.25 + c + 10.0 * g));
    }

  const auto adj = random_field(1, 1, M, TransportMode::adjoint, gen, 0.1, 2.0);
  for (int pick = 0; pick < M; ++pick) {
    AngularFluxField spike(1, 1, M, TransportMode::forward);
    spike(0, 0, pick) = 3.0;
    const OmegaFluxField s = omega_flux(spike, adj, q);
    CHECK(std::abs(s.values(0, 0) - adj(0, 0, pick)) <= 1e-12 * adj(0, 0, pick));
  }
}

TEST_CASE("omega_flux matches a two-pass oracle and stays within the adjoint range") {
  const QuadratureSet q = build_quadrature(2, 3);
  const int M = q.size();
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto fwd = random_field(5, 2, M, TransportMode::forward, gen, 0.0, 1.0);
    const auto adj = random_field(5, 2, M, TransportMode::adjoint, gen, 0.0, 5.0);
    const OmegaFluxField om = omega_flux(fwd, adj, q);
    for (int c = 0; c < 5; ++c)
      for (int g = 0; g < 2; ++g) {
        double den = 0.0;
        for (int m = 0; m < M; ++m) den += q.weight(m) * fwd(c, g, m);
        double num = 0.0;
        for (int m = 0; m < M; ++m) num += q.weight(m) * fwd(c, g, m) * adj(c, g, m);
        CHECK(rel_diff(om.values(c, g), num / den) <= 1e-12);
        double lo = adj(c, g, 0), hi = adj(c, g, 0);
        for (int m = 0; m < M; ++m) {
          lo = std::min(lo, adj(c, g, m));
          hi = std::max(hi, adj(c, g, m));
        }
        CHECK(om.values(c, g) >= lo * (1.0 - 1e-14));
        CHECK(om.values(c, g) <= hi * (1.0 + 1e-14));
      }
  }
}

TEST_CASE("omega_flux falls back to the angle average where the forward flux vanishes") {
  const QuadratureSet q = build_quadrature(1, 2);
  const int M = q.size();
  AngularFluxField fwd(2, 1, M, TransportMode::forward);
  AngularFluxField adj(2, 1, M, TransportMode::adjoint);
  for (int m = 0; m < M; ++m) {
    fwd(0, 0, m) = 1.0;
    adj(0, 0, m) = 2.0;
    adj(1, 0, m) = 1.0 + m;
  }
  const OmegaFluxField om = omega_flux(fwd, adj, q);
  CHECK(!om.is_fallback(0, 0));
  CHECK(om.is_fallback(1, 0));
  double avg = 0.0;
  for (int m = 0; m < M; ++m) avg += q.weight(m) * adj(1, 0, m);
  CHECK(rel_diff(om.values(1, 0), avg / kFourPi) <= 1e-14);
}

TEST_CASE("cadis_params two-cell hand example") {
  const ProblemModel m = two_cell_model();
  ScalarFluxField phi(2, 1);
  phi(0, 0) = 2.0;
  phi(1, 0) = 1.0;
  const ImportanceMap map = cadis_params(phi, m, 5.0);
  CHECK(map.R == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(map.q_hat(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(map.q_hat(1, 0) == 0.0);
  CHECK(map.w0(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(map.w_low(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(map.w_surv(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(map.w_high(0, 0) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));
  CHECK(map.w_low(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(map.w_surv(1, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(map.w_high(1, 0) == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
  check_map_invariants(map, m);
}

TEST_CASE("cadis_params is invariant to adjoint scaling") {
  const ProblemModel m = builtin_problem("box_scatter");
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  ScalarFluxField phi(m.mesh.cell_count(), m.n_groups());
  for (auto& v : phi.values()) v = u(gen);
  const ImportanceMap base = cadis_params(phi, m);
  check_map_invariants(base, m);
  for (double k : {1e-6, 7.3, 1e6}) {
    CAPTURE(k);
    ScalarFluxField scaled = phi;
    for (auto& v : scaled.values()) v *= k;
    const ImportanceMap map = cadis_params(scaled, m);
    CHECK(rel_diff(map.R, k * base.R) <= 1e-12);
    for (int c = 0; c < map.cells(); ++c)
      for (int g = 0; g < map.groups; ++g) {
        CHECK(rel_diff(map.q_hat(c, g), base.q_hat(c, g)) <= 1e-12);
        CHECK(rel_diff(map.w0(c, g), base.w0(c, g)) <= 1e-12);
        CHECK(rel_diff(map.w_low(c, g), base.w_low(c, g)) <= 1e-12);
        CHECK(rel_diff(map.w_surv(c, g), base.w_surv(c, g)) <= 1e-12);
        CHECK(rel_diff(map.w_high(c, g), base.w_high(c, g)) <= 1e-12);
      }
  }
}

TEST_CASE("uniform importance over a uniform source does not bias") {
  const ProblemModel m = builtin_problem("infinite_medium");
  const ImportanceMap map = cadis_params(ScalarFluxField(m.mesh.cell_count(), 1, 0.4), m);
  const CellGroupField q = source_density(m);
  const double S = total_source_strength(m);
  for (int c = 0; c < map.cells(); ++c) {
    CHECK(rel_diff(map.q_hat(c, 0), q(c, 0) / S) <= 1e-12);
    CHECK(rel_diff(map.w0(c, 0), 1.0) <= 1e-12);
    CHECK(rel_diff(map.w_surv(c, 0), 1.0) <= 1e-12);
  }
}

TEST_CASE("zero importance means no window and zero response path throws") {
  const ProblemModel m = two_cell_model();
  ScalarFluxField phi(2, 1);
  phi(0, 0) = 1.0;
  const ImportanceMap map = cadis_params(phi, m);
  CHECK(!map.has_window(1, 0));
  CHECK(map.w_low(1, 0) == 0.0);
  CHECK(map.w_high(1, 0) == 0.0);
  try {
    cadis_params(ScalarFluxField(2, 1), m);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("no response path") != std::string::npos);
  }
}

TEST_CASE("forward-weighted adjoint sources") {
  ProblemModel m = test::slab_model(1, 1, 1.0, 1.0, {1.0, 1.0}, {{0.0, 0.0}, {0.0, 0.0}});
  m.detectors.push_back({"d", {0}, {1.0, 1.0}});
  ScalarFluxField phi(1, 2);
  phi(0, 0) = 2.0;
  phi(0, 1) = 4.0;
  const auto fs = fw_adjoint_source(phi, m, FwObjective::flux_space);
  CHECK(fs(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(fs(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  const auto fe = fw_adjoint_source(phi, m, FwObjective::flux_energy_space);
  CHECK(fe(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(fe(0, 1) == doctest::Approx(0.25).epsilon(1e-15));
  const auto ds = fw_adjoint_source(phi, m, FwObjective::dose_space);
  CHECK(ds(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(ds(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("isotropic problem gives the same map for cadis and cadis_omega") {
  const ProblemModel m = builtin_problem("infinite_medium");
  const QuadratureSet q = build_quadrature(2, 2);
  VrOptions a;
  a.method = VrMethod::cadis;
  VrOptions b = a;
  b.method = VrMethod::cadis_omega;
  const VrResult ra = make_vr(m, q, a);
  const VrResult rb = make_vr(m, q, b);
  CHECK(ra.solves.size() == 1);
  CHECK(rb.solves.size() == 2);
  for (int c = 0; c < ra.map.cells(); ++c) {
    CHECK(rel_diff(ra.map.q_hat(c, 0), rb.map.q_hat(c, 0)) <= 1e-9);
    CHECK(rel_diff(ra.map.w_low(c, 0), rb.map.w_low(c, 0)) <= 1e-9);
    CHECK(rel_diff(ra.map.w_surv(c, 0), rb.map.w_surv(c, 0)) <= 1e-9);
    CHECK(rel_diff(ra.map.w_high(c, 0), rb.map.w_high(c, 0)) <= 1e-9);
  }
  check_map_invariants(ra.map, m);
  check_map_invariants(rb.map, m);
}

TEST_CASE("every method yields a consistent map on box_scatter") {
  const ProblemModel m = builtin_problem("box_scatter");
  const QuadratureSet q = build_quadrature(2, 2);
  for (VrMethod method : {VrMethod::cadis, VrMethod::cadis_omega, VrMethod::fw_cadis,
                          VrMethod::fw_cadis_omega}) {
    CAPTURE(to_string(method));
    VrOptions o;
    o.method = method;
    const VrResult r = make_vr(m, q, o);
    CHECK(r.map.method == method);
    check_map_invariants(r.map, m);
  }
}

TEST_CASE("cadis_omega prefers the channel side of the labyrinth detector") {
  const ProblemModel m = builtin_problem("labyrinth2d");
  const QuadratureSet q = build_quadrature(4, 4);
  VrOptions o;
  o.method = VrMethod::cadis_omega;
  const VrResult r = make_vr(m, q, o);
  // A cell between the channel exit and the detector, and its mirror image
  // through the detector center.
  const int exit_side = m.mesh.locate(65.0, -7.0);
  const int far_side = m.mesh.locate(85.0, -23.0);
  for (int g = 0; g < m.n_groups(); ++g) {
    CAPTURE(g);
    REQUIRE(r.map.has_window(exit_side, g));
    REQUIRE(r.map.has_window(far_side, g));
    CHECK(r.map.w_surv(exit_side, g) < r.map.w_surv(far_side, g));
  }
}

TEST_CASE("no detector means no response path") {
  ProblemModel m = builtin_problem("box_scatter");
  m.detectors.clear();
  VrOptions o;
  try {
    make_vr(m, build_quadrature(1, 1), o);
    FAIL("expected a solver error");
  } catch (const SolverError& e) {
    CHECK(std::string(e.what()).find("no response path") != std::string::npos);
  }
}
