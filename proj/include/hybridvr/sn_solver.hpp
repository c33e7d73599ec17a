#ifndef HYBRIDVR_SN_SOLVER_HPP
#define HYBRIDVR_SN_SOLVER_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hybridvr/fields.hpp"
#include "hybridvr/problem_model.hpp"
#include "hybridvr/quadrature.hpp"

namespace hybridvr {

enum class TransportMode { forward, adjoint };

// Angular flux psi[cell][group][direction]. Storage is group-major so a
// sweep over one group touches contiguous memory.
//
// For adjoint solutions the values are reported in physical directions:
// psi_adj(c, g, m) pairs with the forward psi(c, g, m). The boundary
// partial currents are those of the swept (direction-reversed) equation.
class AngularFluxField {
 public:
  AngularFluxField() = default;
  AngularFluxField(int cells, int groups, int directions, TransportMode sense)
      : cells_(cells),
        groups_(groups),
        dirs_(directions),
        sense_(sense),
        data_(static_cast<std::size_t>(cells) * groups * directions, 0.0) {
    for (auto& f : outflow) f.assign(static_cast<std::size_t>(groups), 0.0);
    for (auto& f : inflow) f.assign(static_cast<std::size_t>(groups), 0.0);
  }

  int cells() const { return cells_; }
  int groups() const { return groups_; }
  int directions() const { return dirs_; }
  TransportMode sense() const { return sense_; }

  double& operator()(int c, int g, int m) { return data_[flat(c, g) + m]; }
  double operator()(int c, int g, int m) const { return data_[flat(c, g) + m]; }

  // The M direction values of one cell and group.
  std::span<double> at(int c, int g) { return {data_.data() + flat(c, g), static_cast<std::size_t>(dirs_)}; }
  std::span<const double> at(int c, int g) const {
    return {data_.data() + flat(c, g), static_cast<std::size_t>(dirs_)};
  }
  // All cells of one group, cell-major.
  std::span<double> group(int g) {
    return {data_.data() + flat(0, g), static_cast<std::size_t>(cells_) * dirs_};
  }

  bool same_shape(const AngularFluxField& o) const {
    return cells_ == o.cells_ && groups_ == o.groups_ && dirs_ == o.dirs_;
  }

  // Outgoing and incoming partial currents per face (Face order) and group,
  // integrated over the face length.
  std::array<std::vector<double>, 4> outflow;
  std::array<std::vector<double>, 4> inflow;

 private:
  std::size_t flat(int c, int g) const {
    return (static_cast<std::size_t>(g) * cells_ + c) * dirs_;
  }

  int cells_ = 0;
  int groups_ = 0;
  int dirs_ = 0;
  TransportMode sense_ = TransportMode::forward;
  std::vector<double> data_;
};

// Spatial discretization of a sweep. Diamond difference applies a
// set-to-zero negative-flux fixup; step characteristics needs none.
enum class SpatialScheme { step_characteristic, diamond_difference };

std::string_view to_string(SpatialScheme scheme);
std::optional<SpatialScheme> parse_spatial_scheme(std::string_view text);

struct SolveOptions {
  double tol = 1e-6;
  int max_iters = 2000;
  SpatialScheme scheme = SpatialScheme::step_characteristic;
};

struct SolveReport {
  std::vector<int> iterations;          // source iterations per group
  double max_rel_change = 0.0;          // last convergence metric
  std::vector<double> balance_residual; // per group
  long fixups = 0;                      // negative-flux fixups in the final sweeps
  int outer_iterations = 0;
  bool converged = false;
};

struct SolveResult {
  AngularFluxField angular;
  ScalarFluxField scalar;
  SolveReport report;
};

// Solves the multigroup fixed-source transport equation by source iteration
// with step-characteristic or diamond-difference sweeps.
//
// Forward mode uses the deck sources. Adjoint mode transposes the scattering
// matrix in energy, sweeps groups from last to first and reverses the
// direction of the returned angular flux. The adjoint source defaults to the
// detector response density; a zero adjoint source throws SolverError("no
// adjoint source"). Non-convergence is reported in SolveReport::converged,
// not thrown.
SolveResult solve(const ProblemModel& model, const QuadratureSet& quad, TransportMode mode,
                  const std::optional<CellGroupField>& adjoint_source = std::nullopt,
                  const SolveOptions& options = {});

struct SweepResult {
  std::vector<double> psi;  // [cell][direction]
  long fixups = 0;
  std::array<double, 4> outflow{};
  std::array<double, 4> inflow{};
};

// One transport sweep of group `group` for a fixed emission density
// total_source[cell * M + m] (per steradian). Reflective faces are iterated
// to self-consistency so the result inverts the streaming-collision operator.
SweepResult sweep_once(const ProblemModel& model, const QuadratureSet& quad, int group,
                       std::span<const double> total_source,
                       SpatialScheme scheme = SpatialScheme::step_characteristic);

// Per-group particle balance residual
//   |source + inscatter - absorption - outscatter - leakage| / (source + inscatter)
// with inscatter/outscatter excluding self-scatter. Adjoint-sense fields are
// checked against the transposed scattering matrix.
std::vector<double> balance_check(const ProblemModel& model, const QuadratureSet& quad,
                                  const AngularFluxField& flux, const CellGroupField& source);

// Angle-integrates an angular flux into a scalar flux.
ScalarFluxField scalar_flux(const AngularFluxField& flux, const QuadratureSet& quad);

// Sum over cells and groups of flux * weight * cell volume.
double response(const ScalarFluxField& flux, const CellGroupField& weight, const Mesh& mesh);

}  // namespace hybridvr

#endif  // HYBRIDVR_SN_SOLVER_HPP
