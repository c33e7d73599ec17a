#ifndef HYBRIDVR_IMPORTANCE_HPP
#define HYBRIDVR_IMPORTANCE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hybridvr/fields.hpp"
#include "hybridvr/problem_model.hpp"
#include "hybridvr/quadrature.hpp"
#include "hybridvr/sn_solver.hpp"

namespace hybridvr {

enum class VrMethod { cadis, cadis_omega, fw_cadis, fw_cadis_omega };

enum class FwObjective { flux_energy_space, flux_space, dose_space };

std::string_view to_string(VrMethod method);
std::string_view to_string(FwObjective objective);
// Accepts both "cadis_omega" and "cadis-omega" spellings.
std::optional<VrMethod> parse_vr_method(std::string_view text);
std::optional<FwObjective> parse_fw_objective(std::string_view text);

// Source biasing and weight-window parameters on the model mesh.
//
// Weights are relative to a source particle of the true normalized source
// q / S, so q_hat * w0 == q / S wherever q > 0. Cells (and groups) with zero
// adjoint importance carry no window: w_low = w_surv = w_high = 0.
struct ImportanceMap {
  VrMethod method = VrMethod::cadis;
  double R = 0.0;    // sum over phase space of phi_adj * q * dV
  double rho = 5.0;  // w_high / w_low
  int nx = 0;
  int ny = 0;
  int groups = 0;
  CellGroupField q_hat;  // biased source density, sum q_hat dV = 1
  CellGroupField w0;     // birth weight, defined where q_hat > 0
  CellGroupField w_low;
  CellGroupField w_surv;
  CellGroupField w_high;

  int cells() const { return nx * ny; }
  bool has_window(int c, int g) const { return w_surv(c, g) > 0.0; }

  bool operator==(const ImportanceMap&) const = default;
};

struct OmegaFluxField {
  ScalarFluxField values;
  std::vector<std::uint8_t> fallback;  // [c * G + g], 1 where the angle average was used

  bool is_fallback(int c, int g) const {
    return fallback[static_cast<std::size_t>(c) * values.groups() + g] != 0;
  }
};

// Angle-integrated contributon flux, sum_m w[m] psi[m] psi_adj[m].
ScalarFluxField contributon_scalar(const AngularFluxField& psi_fwd,
                                   const AngularFluxField& psi_adj, const QuadratureSet& quad);

// Forward-weighted adjoint flux: contributon flux divided by the forward
// scalar flux. Where the forward scalar flux is at most fallback_delta times
// its maximum over the mesh, the plain angle average sum w psi_adj / 4 pi is
// used instead and flagged.
OmegaFluxField omega_flux(const AngularFluxField& psi_fwd, const AngularFluxField& psi_adj,
                          const QuadratureSet& quad, double fallback_delta = 1e-12);

// CADIS source biasing and weight windows from an adjoint scalar field.
// Throws SolverError("no response path") when R == 0.
ImportanceMap cadis_params(const ScalarFluxField& phi_adj, const ProblemModel& model,
                           double rho = 5.0, VrMethod method = VrMethod::cadis);

// FW-CADIS adjoint source built from a forward scalar flux.
CellGroupField fw_adjoint_source(const ScalarFluxField& phi_fwd, const ProblemModel& model,
                                 FwObjective objective);

struct VrOptions {
  VrMethod method = VrMethod::cadis;
  FwObjective objective = FwObjective::dose_space;
  double rho = 5.0;
  SolveOptions solve;
};

struct TimedSolve {
  std::string label;  // "forward" or "adjoint"
  double seconds = 0.0;
  SolveReport report;
};

struct VrResult {
  ImportanceMap map;
  std::vector<TimedSolve> solves;
  // Field the map was built from (phi_adj or phi_adj_omega).
  ScalarFluxField importance;
  double seconds = 0.0;  // total deterministic wall time
};

// Runs the deterministic solves a method needs and builds its map.
VrResult make_vr(const ProblemModel& model, const QuadratureSet& quad, const VrOptions& options);

}  // namespace hybridvr

#endif  // HYBRIDVR_IMPORTANCE_HPP
