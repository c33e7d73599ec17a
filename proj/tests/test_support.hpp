#ifndef HYBRIDVR_TEST_SUPPORT_HPP
#define HYBRIDVR_TEST_SUPPORT_HPP

#include <cmath>
#include <vector>

#include "hybridvr/problem_model.hpp"

namespace hybridvr::test {

// nx * ny mesh of unit-free uniform cells, one material, vacuum faces.
inline ProblemModel slab_model(int nx, int ny, double width, double height,
                               std::vector<double> sigma_t,
                               std::vector<std::vector<double>> sigma_s) {
  ProblemModel m;
  m.name = "test";
  m.mesh.nx = nx;
  m.mesh.ny = ny;
  m.mesh.x_edges = uniform_edges(0.0, width, nx);
  m.mesh.y_edges = uniform_edges(0.0, height, ny);
  m.mesh.cell_material.assign(static_cast<std::size_t>(nx) * ny, 0);
  m.xs.n_groups = static_cast<int>(sigma_t.size());
  m.xs.materials.push_back({"m0", std::move(sigma_t), std::move(sigma_s)});
  return m;
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace hybridvr::test

#endif  // HYBRIDVR_TEST_SUPPORT_HPP
