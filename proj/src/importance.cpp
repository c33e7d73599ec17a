#include "hybridvr/importance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hybridvr/errors.hpp"

namespace hybridvr {

namespace {

void require_same_shape(const AngularFluxField& a, const AngularFluxField& b,
                        const QuadratureSet& quad, const char* op) {
  if (!a.same_shape(b) || a.directions() != quad.size())
    throw std::invalid_argument(std::string(op) +
                                ": forward and adjoint angular fluxes differ in shape");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string_view to_string(VrMethod method) {
  switch (method) {
    case VrMethod::cadis: return "cadis";
    case VrMethod::cadis_omega: return "cadis_omega";
    case VrMethod::fw_cadis: return "fw_cadis";
    case VrMethod::fw_cadis_omega: return "fw_cadis_omega";
  }
  return "unknown";
}

std::string_view to_string(FwObjective objective) {
  switch (objective) {
    case FwObjective::flux_energy_space: return "flux_energy_space";
    case FwObjective::flux_space: return "flux_space";
    case FwObjective::dose_space: return "dose_space";
  }
  return "unknown";
}

std::optional<VrMethod> parse_vr_method(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '-', '_');
  for (VrMethod m : {VrMethod::cadis, VrMethod::cadis_omega, VrMethod::fw_cadis,
                     VrMethod::fw_cadis_omega})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

std::optional<FwObjective> parse_fw_objective(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '-', '_');
  for (FwObjective o :
       {FwObjective::flux_energy_space, FwObjective::flux_space, FwObjective::dose_space})
    if (s == to_string(o)) return o;
  return std::nullopt;
}

ScalarFluxField contributon_scalar(const AngularFluxField& psi_fwd,
                                   const AngularFluxField& psi_adj, const QuadratureSet& quad) {
  require_same_shape(psi_fwd, psi_adj, quad, "contributon_scalar");
  const int M = quad.size();
  ScalarFluxField out(psi_fwd.cells(), psi_fwd.groups());
  for (int c = 0; c < psi_fwd.cells(); ++c)
    for (int g = 0; g < psi_fwd.groups(); ++g) {
      auto f = psi_fwd.at(c, g);
      auto a = psi_adj.at(c, g);
      double sum = 0.0;
      for (int m = 0; m < M; ++m) sum += quad.weight(m) * f[m] * a[m];
      out(c, g) = sum;
    }
  return out;
}

OmegaFluxField omega_flux(const AngularFluxField& psi_fwd, const AngularFluxField& psi_adj,
                          const QuadratureSet& quad, double fallback_delta) {
  require_same_shape(psi_fwd, psi_adj, quad, "omega_flux");
  if (!(fallback_delta > 0.0 && fallback_delta < 1.0))
    throw std::invalid_argument("omega_flux: fallback_delta must lie in (0, 1)");
  const int C = psi_fwd.cells();
  const int G = psi_fwd.groups();
  const int M = quad.size();

  ScalarFluxField numer(C, G), denom(C, G), plain(C, G);
  double max_denom = 0.0;
  for (int c = 0; c < C; ++c)
    for (int g = 0; g < G; ++g) {
      auto f = psi_fwd.at(c, g);
      auto a = psi_adj.at(c, g);
      double n = 0.0, d = 0.0, p = 0.0;
      for (int m = 0; m < M; ++m) {
        const double w = quad.weight(m);
        n += w * f[m] * a[m];
        d += w * f[m];
        p += w * a[m];
      }
      numer(c, g) = n;
      denom(c, g) = d;
      plain(c, g) = p;
      max_denom = std::max(max_denom, d);
    }

  OmegaFluxField out{ScalarFluxField(C, G), std::vector<std::uint8_t>(static_cast<std::size_t>(C) * G, 0)};
  const double threshold = fallback_delta * max_denom;
  for (int c = 0; c < C; ++c)
    for (int g = 0; g < G; ++g) {
      if (denom(c, g) > threshold && denom(c, g) > 0.0) {
        out.values(c, g) = numer(c, g) / denom(c, g);
      } else {
        out.values(c, g) = plain(c, g) / (4.0 * std::numbers::pi);
        out.fallback[static_cast<std::size_t>(c) * G + g] = 1;
      }
    }
  return out;
}

ImportanceMap cadis_params(const ScalarFluxField& phi_adj, const ProblemModel& model,
                           double rho, VrMethod method) {
  const Mesh& mesh = model.mesh;
  const int C = mesh.cell_count();
  const int G = model.n_groups();
  if (phi_adj.cells() != C || phi_adj.groups() != G)
    throw std::invalid_argument("cadis_params: adjoint flux does not match the model mesh");
  if (!(rho > 1.0)) throw std::invalid_argument("cadis_params: window ratio must exceed 1");
  for (double v : phi_adj.values())
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("cadis_params: adjoint flux must be finite and >= 0");

  const CellGroupField q = source_density(model);
  const double S = total_source_strength(model);
  const double vol = mesh.cell_volume();

  double R = 0.0;
  for (int c = 0; c < C; ++c)
    for (int g = 0; g < G; ++g) R += phi_adj(c, g) * q(c, g) * vol;
  if (!(R > 0.0) || !(S > 0.0)) throw SolverError("no response path");

  // Weights are per unit source particle: w = (R / S) / phi_adj.
  const double r_per_particle = R / S;
  ImportanceMap map;
  map.method = method;
  map.R = R;
  map.rho = rho;
  map.nx = mesh.nx;
  map.ny = mesh.ny;
  map.groups = G;
  map.q_hat = CellGroupField(C, G);
  map.w0 = CellGroupField(C, G);
  map.w_low = CellGroupField(C, G);
  map.w_surv = CellGroupField(C, G);
  map.w_high = CellGroupField(C, G);
  for (int c = 0; c < C; ++c)
    for (int g = 0; g < G; ++g) {
      const double imp = phi_adj(c, g);
      if (!(imp > 0.0)) continue;
      const double target = r_per_particle / imp;
      const double low = 2.0 * target / (1.0 + rho);
      map.w_surv(c, g) = target;
      map.w_low(c, g) = low;
      map.w_high(c, g) = rho * low;
      if (q(c, g) > 0.0) {
        map.q_hat(c, g) = imp * q(c, g) / R;
        map.w0(c, g) = target;
      }
    }
  return map;
}

CellGroupField fw_adjoint_source(const ScalarFluxField& phi_fwd, const ProblemModel& model,
                                 FwObjective objective) {
  const int C = model.mesh.cell_count();
  const int G = model.n_groups();
  if (phi_fwd.cells() != C || phi_fwd.groups() != G)
    throw std::invalid_argument("fw_adjoint_source: forward flux does not match the model mesh");
  double max_phi = 0.0;
  for (double v : phi_fwd.values()) max_phi = std::max(max_phi, v);
  if (!(max_phi > 0.0)) throw SolverError("fw_adjoint_source: forward flux is identically zero");
  const double floor = 1e-12 * max_phi;

  CellGroupField qdag(C, G);
  const CellGroupField sigma_d = response_density(model);
  for (int c = 0; c < C; ++c) {
    switch (objective) {
      case FwObjective::flux_energy_space:
        for (int g = 0; g < G; ++g) qdag(c, g) = 1.0 / std::max(phi_fwd(c, g), floor);
        break;
      case FwObjective::flux_space: {
        double total = 0.0;
        for (int g = 0; g < G; ++g) total += phi_fwd(c, g);
        const double v = 1.0 / std::max(total, floor);
        for (int g = 0; g < G; ++g) qdag(c, g) = v;
        break;
      }
      case FwObjective::dose_space: {
        double dose = 0.0;
        for (int g = 0; g < G; ++g) dose += phi_fwd(c, g) * sigma_d(c, g);
        const double inv = 1.0 / std::max(dose, floor);
        for (int g = 0; g < G; ++g) qdag(c, g) = sigma_d(c, g) * inv;
        break;
      }
    }
  }
  return qdag;
}

VrResult make_vr(const ProblemModel& model, const QuadratureSet& quad, const VrOptions& options) {
  const auto t_start = std::chrono::steady_clock::now();
  VrResult out;
  const bool omega =
      options.method == VrMethod::cadis_omega || options.method == VrMethod::fw_cadis_omega;
  const bool forward_weighted =
      options.method == VrMethod::fw_cadis || options.method == VrMethod::fw_cadis_omega;

  auto timed = [&](const char* label, TransportMode mode,
                   const std::optional<CellGroupField>& src) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult r = solve(model, quad, mode, src, options.solve);
    out.solves.push_back({label, seconds_since(t0), r.report});
    return r;
  };

  if (!forward_weighted) {
    const CellGroupField sigma_d = response_density(model);
    if (std::all_of(sigma_d.values().begin(), sigma_d.values().end(),
                    [](double v) { return v == 0.0; }))
      throw SolverError("no response path: model has no detector response");
  }

  std::optional<SolveResult> fwd;
  if (omega || forward_weighted) fwd = timed("forward", TransportMode::forward, std::nullopt);

  std::optional<CellGroupField> qdag;
  if (forward_weighted) qdag = fw_adjoint_source(fwd->scalar, model, options.objective);
  SolveResult adj = timed("adjoint", TransportMode::adjoint, qdag);

  if (omega)
    out.importance = omega_flux(fwd->angular, adj.angular, quad).values;
  else
    out.importance = adj.scalar;
  out.map = cadis_params(out.importance, model, options.rho, options.method);
  out.seconds = seconds_since(t_start);
  return out;
}

}  // namespace hybridvr
