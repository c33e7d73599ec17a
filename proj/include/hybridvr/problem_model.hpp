#ifndef HYBRIDVR_PROBLEM_MODEL_HPP
#define HYBRIDVR_PROBLEM_MODEL_HPP

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "hybridvr/fields.hpp"

namespace hybridvr {

enum class Boundary { vacuum, reflective };

// Face order used everywhere a per-face array appears.
enum class Face { west = 0, east = 1, south = 2, north = 3 };

// Uniform 2-D Cartesian mesh, one material per cell. Cell (i, j) has flat
// index j * nx + i, with j = 0 the southmost row.
struct Mesh {
  int nx = 0;
  int ny = 0;
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  std::vector<int> cell_material;
  std::array<Boundary, 4> boundary{Boundary::vacuum, Boundary::vacuum,
                                   Boundary::vacuum, Boundary::vacuum};

  int cell_count() const { return nx * ny; }
  int index(int i, int j) const { return j * nx + i; }
  int column(int cell) const { return cell % nx; }
  int row(int cell) const { return cell / nx; }
  double dx() const { return (x_edges.back() - x_edges.front()) / nx; }
  double dy() const { return (y_edges.back() - y_edges.front()) / ny; }
  // Area of one cell; the 2-D "volume" per unit length in z.
  double cell_volume() const { return dx() * dy(); }
  Boundary face(Face f) const { return boundary[static_cast<int>(f)]; }

  // Cell containing (x, y), or -1 when outside the mesh. Points on an
  // interior edge belong to the cell above/right of it.
  int locate(double x, double y) const;

  bool operator==(const Mesh&) const = default;
};

// Builds the uniform edge vector lo, lo + h, ..., hi.
std::vector<double> uniform_edges(double lo, double hi, int n);

struct Material {
  std::string name;
  std::vector<double> sigma_t;                // [g], 1/cm
  std::vector<std::vector<double>> sigma_s;   // [g][g'] for g -> g', 1/cm

  double absorption(int g) const;
  bool operator==(const Material&) const = default;
};

struct MultigroupXS {
  int n_groups = 0;
  std::vector<Material> materials;

  bool operator==(const MultigroupXS&) const = default;
};

enum class SourceKind { cell_region, point_in_cell };

struct SourceSpec {
  SourceKind kind = SourceKind::cell_region;
  std::vector<int> cells;
  std::vector<double> spectrum;  // per-group emission probabilities
  double strength = 1.0;         // S, particles/s (per cm of z extent)

  bool operator==(const SourceSpec&) const = default;
};

struct DetectorSpec {
  std::string name;
  std::vector<int> cells;
  std::vector<double> sigma_d;  // [g], 1/cm

  bool operator==(const DetectorSpec&) const = default;
};

struct ProblemModel {
  std::string name;
  Mesh mesh;
  MultigroupXS xs;
  std::vector<SourceSpec> sources;
  std::vector<DetectorSpec> detectors;

  int n_groups() const { return xs.n_groups; }
  const Material& material(int cell) const {
    return xs.materials[static_cast<std::size_t>(mesh.cell_material[cell])];
  }

  bool operator==(const ProblemModel&) const = default;
};

// Checks every model invariant; throws ValidationError naming the field.
void validate(const ProblemModel& model);

// Returns a copy with sigma_s[g -> g'] replaced by sigma_s[g' -> g] for
// every material. sigma_t is untouched.
MultigroupXS transpose_scattering(const MultigroupXS& xs);

// Isotropic external source density q[c][g] in particles/(cm^3 s).
CellGroupField source_density(const ProblemModel& model);

// Total source strength S summed over all sources.
double total_source_strength(const ProblemModel& model);

// Detector response cross sections sigma_d[c][g], summed over detectors
// and zero outside detector cells.
CellGroupField response_density(const ProblemModel& model);

// Sorted union of all detector cells.
std::vector<int> detector_cells(const ProblemModel& model);

// Names accepted by builtin_problem().
std::vector<std::string> builtin_problem_names();

// Bundled problem decks; throws std::invalid_argument for unknown names.
ProblemModel builtin_problem(std::string_view name);

}  // namespace hybridvr

#endif  // HYBRIDVR_PROBLEM_MODEL_HPP
