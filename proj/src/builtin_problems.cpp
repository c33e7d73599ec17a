#include <stdexcept>
#include <string>

#include "hybridvr/problem_model.hpp"

namespace hybridvr {

namespace {

Mesh make_mesh(int nx, int ny, double x0, double x1, double y0, double y1, Boundary west,
               Boundary east, Boundary south, Boundary north) {
  Mesh mesh;
  mesh.nx = nx;
  mesh.ny = ny;
  mesh.x_edges = uniform_edges(x0, x1, nx);
  mesh.y_edges = uniform_edges(y0, y1, ny);
  mesh.cell_material.assign(static_cast<std::size_t>(nx) * ny, 0);
  mesh.boundary = {west, east, south, north};
  return mesh;
}

// Cells whose centers fall inside [x0, x1] x [y0, y1].
std::vector<int> cells_in_box(const Mesh& mesh, double x0, double x1, double y0, double y1) {
  std::vector<int> cells;
  for (int j = 0; j < mesh.ny; ++j) {
    const double yc = 0.5 * (mesh.y_edges[j] + mesh.y_edges[j + 1]);
    for (int i = 0; i < mesh.nx; ++i) {
      const double xc = 0.5 * (mesh.x_edges[i] + mesh.x_edges[i + 1]);
      if (xc >= x0 && xc <= x1 && yc >= y0 && yc <= y1) cells.push_back(mesh.index(i, j));
    }
  }
  return cells;
}

void fill_box(Mesh& mesh, int material, double x0, double x1, double y0, double y1) {
  for (int c : cells_in_box(mesh, x0, x1, y0, y1)) mesh.cell_material[c] = material;
}

// Pure absorber filling a closed reflective box; the exact flux is q / sigma_a.
ProblemModel infinite_medium() {
  ProblemModel m;
  m.name = "infinite_medium";
  m.mesh = make_mesh(10, 10, 0.0, 10.0, 0.0, 10.0, Boundary::reflective, Boundary::reflective,
                     Boundary::reflective, Boundary::reflective);
  m.xs.n_groups = 1;
  m.xs.materials.push_back({"absorber", {0.5}, {{0.0}}});
  std::vector<int> all(static_cast<std::size_t>(m.mesh.cell_count()));
  for (int c = 0; c < m.mesh.cell_count(); ++c) all[c] = c;
  m.sources.push_back({SourceKind::cell_region, all, {1.0}, 100.0});
  m.detectors.push_back({"everywhere", all, {1.0}});
  return m;
}

// 1-D slab of unit-cross-section absorber, 2 cm thick, with a uniform
// isotropic source in the leftmost column. South/north are reflective so
// the problem is one-dimensional in x.
ProblemModel absorber_slab() {
  ProblemModel m;
  m.name = "absorber_slab";
  m.mesh = make_mesh(200, 1, 0.0, 2.0, 0.0, 0.01, Boundary::vacuum, Boundary::vacuum,
                     Boundary::reflective, Boundary::reflective);
  m.xs.n_groups = 1;
  m.xs.materials.push_back({"absorber", {1.0}, {{0.0}}});
  m.sources.push_back({SourceKind::cell_region, {m.mesh.index(0, 0)}, {1.0}, 1.0});
  m.detectors.push_back({"right_column", {m.mesh.index(199, 0)}, {1.0}});
  return m;
}

// Two-group scattering box with down- and weak up-scatter, a central source
// and a corner detector.
ProblemModel box_scatter() {
  ProblemModel m;
  m.name = "box_scatter";
  m.mesh = make_mesh(20, 20, 0.0, 20.0, 0.0, 20.0, Boundary::vacuum, Boundary::vacuum,
                     Boundary::vacuum, Boundary::vacuum);
  m.xs.n_groups = 2;
  m.xs.materials.push_back({"scatterer", {0.5, 0.8}, {{0.2, 0.2}, {0.02, 0.6}}});
  m.xs.materials.push_back({"absorber", {0.6, 1.0}, {{0.1, 0.1}, {0.0, 0.3}}});
  fill_box(m.mesh, 1, 8.0, 12.0, 14.0, 20.0);
  m.sources.push_back({SourceKind::cell_region, cells_in_box(m.mesh, 2.0, 6.0, 2.0, 6.0),
                       {0.8, 0.2}, 10.0});
  m.detectors.push_back({"corner", cells_in_box(m.mesh, 15.0, 19.0, 15.0, 19.0), {0.3, 1.2}});
  return m;
}

// Concrete labyrinth: a source room on the left, a thick concrete shield
// pierced by one straight channel, and a detector to the right of the shield
// below the channel axis. Four groups, fast source, downscatter only.
ProblemModel labyrinth2d() {
  ProblemModel m;
  m.name = "labyrinth2d";
  m.mesh = make_mesh(100, 60, -100.0, 100.0, -60.0, 60.0, Boundary::vacuum, Boundary::vacuum,
                     Boundary::vacuum, Boundary::vacuum);
  m.xs.n_groups = 4;
  const Material air{"air",
                     {5e-5, 5e-5, 5e-5, 5e-5},
                     {{2e-5, 2e-5, 0.0, 0.0}, {0.0, 2e-5, 2e-5, 0.0}, {0.0, 0.0, 2e-5, 2e-5},
                      {0.0, 0.0, 0.0, 4e-5}}};
  const Material concrete{"concrete",
                          {0.12, 0.20, 0.30, 0.40},
                          {{0.05, 0.06, 0.005, 0.0},
                           {0.0, 0.10, 0.09, 0.0},
                           {0.0, 0.0, 0.15, 0.13},
                           {0.0, 0.0, 0.0, 0.36}}};
  const Material nai{"nai",
                     {0.10, 0.15, 0.20, 0.50},
                     {{0.06, 0.03, 0.0, 0.0},
                      {0.0, 0.10, 0.03, 0.0},
                      {0.0, 0.0, 0.14, 0.04},
                      {0.0, 0.0, 0.0, 0.30}}};
  m.xs.materials = {air, concrete, nai};

  // Shield with an open channel along the x axis.
  fill_box(m.mesh, 1, -50.0, 60.0, -60.0, 60.0);
  fill_box(m.mesh, 0, -50.0, 60.0, -2.0, 2.0);
  fill_box(m.mesh, 2, 70.0, 80.0, -20.0, -10.0);

  const int host = m.mesh.locate(-75.0, 0.0);
  m.sources.push_back({SourceKind::point_in_cell, {host}, {1.0, 0.0, 0.0, 0.0}, 1.0});
  m.detectors.push_back(
      {"nai", cells_in_box(m.mesh, 70.0, 80.0, -20.0, -10.0), nai.sigma_t});
  return m;
}

}  // namespace

std::vector<std::string> builtin_problem_names() {
  return {"labyrinth2d", "box_scatter", "infinite_medium", "absorber_slab"};
}

ProblemModel builtin_problem(std::string_view name) {
  ProblemModel m;
  if (name == "labyrinth2d")
    m = labyrinth2d();
  else if (name == "box_scatter")
    m = box_scatter();
  else if (name == "infinite_medium")
    m = infinite_medium();
  else if (name == "absorber_slab")
    m = absorber_slab();
  else
    throw std::invalid_argument("unknown builtin problem '" + std::string(name) + "'");
  validate(m);
  return m;
}

}  // namespace hybridvr
