#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "hybridvr/compare.hpp"
#include "hybridvr/csv_io.hpp"
#include "hybridvr/deck.hpp"
#include "hybridvr/errors.hpp"
#include "hybridvr/importance.hpp"
#include "hybridvr/mc_engine.hpp"
#include "hybridvr/problem_model.hpp"
#include "hybridvr/quadrature.hpp"
#include "hybridvr/sn_solver.hpp"

namespace hv = hybridvr;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

struct Globals {
  std::string deck;
  std::string out;
  std::string quad = "4,4";
  double tol = 1e-6;
  std::string scheme = "sc";
};

struct SolveFlags {
  bool angular = false;
};

struct VrFlags {
  std::string method = "cadis";
  std::string objective = "dose_space";
  double rho = 5.0;
};

struct McFlags {
  std::string vr;
  std::uint64_t histories = 1000000;
  std::uint64_t seed = 1;
  int workers = 1;
  bool no_timing = false;
};

hv::ProblemModel load_model(const Globals& g) {
  if (g.deck.empty()) throw CLI::ValidationError("--deck", "a deck is required");
  const std::string prefix = "builtin:";
  if (g.deck.rfind(prefix, 0) == 0) return hv::builtin_problem(g.deck.substr(prefix.size()));
  return hv::load_deck(g.deck);
}

hv::SolveOptions solve_options(const Globals& g) {
  hv::SolveOptions opts;
  opts.tol = g.tol;
  opts.scheme = *hv::parse_spatial_scheme(g.scheme);
  return opts;
}

hv::QuadratureSet load_quadrature(const Globals& g) {
  const auto comma = g.quad.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--quad", "expected \"P,A\"");
  int p = 0, a = 0;
  try {
    p = std::stoi(g.quad.substr(0, comma));
    a = std::stoi(g.quad.substr(comma + 1));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--quad", "expected two integers \"P,A\"");
  }
  if (p < 1 || a < 1) throw CLI::ValidationError("--quad", "counts must be positive");
  return hv::build_quadrature(p, a);
}

std::string out_or(const Globals& g, const std::string& fallback) {
  return g.out.empty() ? fallback : g.out;
}

void print_report(const std::string& label, const hv::SolveReport& r) {
  std::printf("%s: converged=%s outer=%d max_rel_change=%.3e fixups=%ld\n", label.c_str(),
              r.converged ? "yes" : "no", r.outer_iterations, r.max_rel_change, r.fixups);
  for (std::size_t g = 0; g < r.iterations.size(); ++g)
    std::printf("  group %zu: iterations=%d balance=%.3e\n", g, r.iterations[g],
                r.balance_residual[g]);
}

int cmd_solve(const Globals& g, const SolveFlags& f, hv::TransportMode mode) {
  const auto model = load_model(g);
  const auto quad = load_quadrature(g);
  const hv::SolveOptions opts = solve_options(g);
  const auto result = hv::solve(model, quad, mode, std::nullopt, opts);
  const bool fwd = mode == hv::TransportMode::forward;
  const std::string path = out_or(g, fwd ? "forward_flux.csv" : "adjoint_flux.csv");
  hv::write_scalar_flux(path, result.scalar, model.mesh);
  std::printf("wrote %s\n", path.c_str());
  if (f.angular) {
    const std::filesystem::path p(path);
    const auto ang = p.parent_path() / (p.stem().string() + "_angular.csv");
    hv::write_angular_flux(ang, result.angular, model.mesh);
    std::printf("wrote %s\n", ang.string().c_str());
  }
  print_report(fwd ? "forward" : "adjoint", result.report);
  return result.report.converged ? 0 : kExitSolver;
}

int cmd_vr(const Globals& g, const VrFlags& f) {
  const auto model = load_model(g);
  const auto quad = load_quadrature(g);
  hv::VrOptions opts;
  opts.method = *hv::parse_vr_method(f.method);
  opts.objective = *hv::parse_fw_objective(f.objective);
  opts.rho = f.rho;
  opts.solve = solve_options(g);
  const auto result = hv::make_vr(model, quad, opts);
  const std::string prefix = out_or(g, "vr");
  hv::write_weight_windows(hv::ww_path(prefix), result.map);
  hv::write_biased_source(hv::biased_source_path(prefix), result.map);
  std::printf("method %s\n", std::string(hv::to_string(opts.method)).c_str());
  std::printf("R %.17g\n", result.map.R);
  for (const auto& s : result.solves)
    std::printf("solve %s %.6f min (converged=%s)\n", s.label.c_str(), s.seconds / 60.0,
                s.report.converged ? "yes" : "no");
  std::printf("deterministic %.6f min\n", result.seconds / 60.0);
  std::printf("wrote %s %s\n", hv::ww_path(prefix).string().c_str(),
              hv::biased_source_path(prefix).string().c_str());
  for (const auto& s : result.solves)
    if (!s.report.converged) return kExitSolver;
  return 0;
}

int cmd_mc(const Globals& g, const McFlags& f) {
  const auto model = load_model(g);
  if (f.histories == 0) throw CLI::ValidationError("--histories", "must be positive");
  hv::McOptions opts;
  opts.histories = f.histories;
  opts.seed = f.seed;
  opts.workers = f.workers;
  std::optional<hv::ImportanceMap> map;
  if (!f.vr.empty()) {
    map = hv::read_importance_map(hv::ww_path(f.vr), hv::biased_source_path(f.vr));
    if (map->nx != model.mesh.nx || map->ny != model.mesh.ny || map->groups != model.n_groups())
      throw hv::ValidationError("weight-window mesh " + std::to_string(map->nx) + "x" +
                                std::to_string(map->ny) + "x" + std::to_string(map->groups) +
                                " does not match deck mesh " + std::to_string(model.mesh.nx) +
                                "x" + std::to_string(model.mesh.ny) + "x" +
                                std::to_string(model.n_groups()));
  }
  const auto tally = hv::run_histories(model, map ? &*map : nullptr, opts);
  const std::string path = out_or(g, "tally.csv");
  hv::write_tally(path, tally, !f.no_timing);
  std::printf("total %.10e rel_err %.4e histories %llu\n", tally.total_mean, tally.total_rel_err,
              static_cast<unsigned long long>(tally.histories));
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_compare(const Globals& g, const McFlags& f, double rho) {
  const auto model = load_model(g);
  const auto quad = load_quadrature(g);
  if (f.histories == 0) throw CLI::ValidationError("--histories", "must be positive");
  hv::CompareOptions opts;
  opts.mc.histories = f.histories;
  opts.mc.seed = f.seed;
  opts.mc.workers = f.workers;
  opts.solve = solve_options(g);
  opts.rho = rho;
  const auto report = hv::run_compare(model, quad, opts);
  std::cout << hv::format_compare_table(report);
  const std::string prefix = out_or(g, "compare");
  std::ofstream(prefix + ".summary.csv") << hv::compare_summary_csv(report);
  std::ofstream(prefix + ".groups.csv") << hv::compare_groups_csv(report);
  std::printf("wrote %s.summary.csv %s.groups.csv\n", prefix.c_str(), prefix.c_str());
  return 0;
}

int cmd_export(const Globals& g) {
  const auto model = load_model(g);
  const std::string path = out_or(g, model.name + ".json");
  hv::write_deck(model, path);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid deterministic/Monte Carlo variance reduction toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--deck", g.deck, "Deck JSON file or builtin:NAME")->configurable(false);
  app.add_option("--out", g.out, "Output file or prefix");
  app.add_option("--quad", g.quad, "Quadrature \"P,A\" polar and azimuthal counts")
      ->capture_default_str();
  app.add_option("--tol", g.tol, "Source-iteration tolerance")->capture_default_str();
  app.add_option("--scheme", g.scheme, "Spatial scheme: sc (step characteristics) | dd")
      ->capture_default_str()
      ->check(CLI::IsMember({"sc", "dd"}));
  app.fallthrough();

  SolveFlags sf;
  auto* forward = app.add_subcommand("forward", "Forward Sn solve; writes the scalar flux");
  forward->add_flag("--angular", sf.angular, "Also write the angular flux");
  auto* adjoint = app.add_subcommand("adjoint", "Adjoint Sn solve; writes the scalar flux");
  adjoint->add_flag("--angular", sf.angular, "Also write the angular flux");

  VrFlags vf;
  auto* vr = app.add_subcommand("vr", "Build source biasing and weight windows");
  vr->add_option("--method", vf.method, "cadis | cadis-omega | fw-cadis | fw-cadis-omega")
      ->capture_default_str()
      ->check([](const std::string& s) {
        return hv::parse_vr_method(s) ? std::string() : "unknown method '" + s + "'";
      });
  vr->add_option("--objective", vf.objective, "flux-energy-space | flux-space | dose-space")
      ->capture_default_str()
      ->check([](const std::string& s) {
        return hv::parse_fw_objective(s) ? std::string() : "unknown objective '" + s + "'";
      });
  vr->add_option("--rho", vf.rho, "Window width ratio w_high / w_low")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  McFlags mf;
  auto* mc = app.add_subcommand("mc", "Run Monte Carlo histories");
  mc->add_option("--vr", mf.vr, "Prefix of the weight-window and biased-source files");
  mc->add_option("--histories", mf.histories)->capture_default_str();
  mc->add_option("--seed", mf.seed)->capture_default_str();
  mc->add_option("--workers", mf.workers)->capture_default_str()->check(CLI::PositiveNumber);
  mc->add_flag("--no-timing", mf.no_timing, "Omit wall-clock lines from the tally file");

  McFlags cf;
  double compare_rho = 5.0;
  auto* compare = app.add_subcommand("compare", "Analog, CADIS and CADIS-Omega side by side");
  compare->add_option("--histories", cf.histories)->capture_default_str();
  compare->add_option("--seed", cf.seed)->capture_default_str();
  compare->add_option("--workers", cf.workers)->capture_default_str()->check(CLI::PositiveNumber);
  compare->add_option("--rho", compare_rho)->capture_default_str()->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("export-deck", "Write a deck (e.g. a builtin) as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*forward) return cmd_solve(g, sf, hv::TransportMode::forward);
    if (*adjoint) return cmd_solve(g, sf, hv::TransportMode::adjoint);
    if (*vr) return cmd_vr(g, vf);
    if (*mc) return cmd_mc(g, mf);
    if (*compare) return cmd_compare(g, cf, compare_rho);
    if (*exp) return cmd_export(g);
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const hv::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const hv::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const hv::SolverError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitUsage;
}
