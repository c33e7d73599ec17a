#include "hybridvr/problem_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "hybridvr/errors.hpp"

namespace hybridvr {

namespace {

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_edges(const std::vector<double>& edges, int n, const char* axis) {
  if (n < 1) fail(std::string("mesh.n") + axis + " must be >= 1");
  if (static_cast<int>(edges.size()) != n + 1)
    fail(std::string("mesh.") + axis + "_edges must have n" + axis + "+1 entries");
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1]))
      fail(std::string("mesh.") + axis + "_edges must be strictly increasing");
  }
}

void check_cells(const std::vector<int>& cells, int n_cells, const std::string& where) {
  if (cells.empty()) fail(where + ".cells must be non-empty");
  for (int c : cells) {
    if (c < 0 || c >= n_cells)
      fail(where + ".cells contains out-of-range cell " + std::to_string(c));
  }
}

}  // namespace

int Mesh::locate(double x, double y) const {
  if (x < x_edges.front() || x > x_edges.back() || y < y_edges.front() ||
      y > y_edges.back())
    return -1;
  int i = static_cast<int>(std::upper_bound(x_edges.begin(), x_edges.end(), x) -
                           x_edges.begin()) - 1;
  int j = static_cast<int>(std::upper_bound(y_edges.begin(), y_edges.end(), y) -
                           y_edges.begin()) - 1;
  i = std::clamp(i, 0, nx - 1);
  j = std::clamp(j, 0, ny - 1);
  return index(i, j);
}

std::vector<double> uniform_edges(double lo, double hi, int n) {
  std::vector<double> e(static_cast<std::size_t>(n) + 1);
  const double h = (hi - lo) / n;
  for (int k = 0; k <= n; ++k) e[k] = lo + h * k;
  e.back() = hi;
  return e;
}

double Material::absorption(int g) const {
  const auto& row = sigma_s[static_cast<std::size_t>(g)];
  return sigma_t[static_cast<std::size_t>(g)] -
         std::accumulate(row.begin(), row.end(), 0.0);
}

void validate(const ProblemModel& model) {
  const Mesh& mesh = model.mesh;
  check_edges(mesh.x_edges, mesh.nx, "x");
  check_edges(mesh.y_edges, mesh.ny, "y");

  const int G = model.xs.n_groups;
  if (G < 1) fail("groups.count must be >= 1");
  if (model.xs.materials.empty()) fail("materials must be non-empty");

  for (std::size_t k = 0; k < model.xs.materials.size(); ++k) {
    const Material& mat = model.xs.materials[k];
    const std::string where = "materials[" + std::to_string(k) + "] (" + mat.name + ")";
    if (static_cast<int>(mat.sigma_t.size()) != G)
      fail(where + ".sigma_t must have groups.count entries");
    if (static_cast<int>(mat.sigma_s.size()) != G)
      fail(where + ".sigma_s must have groups.count rows");
    for (int g = 0; g < G; ++g) {
      if (!finite_nonneg(mat.sigma_t[g]))
        fail(where + ".sigma_t[" + std::to_string(g) + "] must be finite and >= 0");
      const auto& row = mat.sigma_s[g];
      if (static_cast<int>(row.size()) != G)
        fail(where + ".sigma_s[" + std::to_string(g) + "] must have groups.count entries");
      double sum = 0.0;
      for (int gp = 0; gp < G; ++gp) {
        if (!finite_nonneg(row[gp]))
          fail(where + ".sigma_s[" + std::to_string(g) + "][" + std::to_string(gp) +
               "] must be finite and >= 0");
        sum += row[gp];
      }
      // Allow for rounding in the row sum of hand-written decks.
      if (sum > mat.sigma_t[g] * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << where << ".sigma_s row sum exceeds sigma_t in group " << g << " ("
           << sum << " > " << mat.sigma_t[g] << ")";
        fail(os.str());
      }
    }
  }

  const int n_cells = mesh.cell_count();
  if (static_cast<int>(mesh.cell_material.size()) != n_cells)
    fail("cell_map must have nx*ny entries");
  const int n_mat = static_cast<int>(model.xs.materials.size());
  for (int c = 0; c < n_cells; ++c) {
    const int m = mesh.cell_material[c];
    if (m < 0 || m >= n_mat)
      fail("cell_map[" + std::to_string(c) + "] refers to undefined material " +
           std::to_string(m));
  }

  for (std::size_t k = 0; k < model.sources.size(); ++k) {
    const SourceSpec& src = model.sources[k];
    const std::string where = "sources[" + std::to_string(k) + "]";
    check_cells(src.cells, n_cells, where);
    if (src.kind == SourceKind::point_in_cell && src.cells.size() != 1)
      fail(where + ": point_in_cell source must have exactly one host cell");
    if (std::set<int>(src.cells.begin(), src.cells.end()).size() != src.cells.size())
      fail(where + ".cells contains duplicates");
    if (static_cast<int>(src.spectrum.size()) != G)
      fail(where + ".spectrum must have groups.count entries");
    double sum = 0.0;
    for (double p : src.spectrum) {
      if (!finite_nonneg(p)) fail(where + ".spectrum entries must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) fail(where + ".spectrum must sum to 1");
    if (!finite_nonneg(src.strength)) fail(where + ".strength must be >= 0");
  }

  for (std::size_t k = 0; k < model.detectors.size(); ++k) {
    const DetectorSpec& det = model.detectors[k];
    const std::string where = "detectors[" + std::to_string(k) + "]";
    check_cells(det.cells, n_cells, where);
    if (std::set<int>(det.cells.begin(), det.cells.end()).size() != det.cells.size())
      fail(where + ".cells contains duplicates");
    if (static_cast<int>(det.sigma_d.size()) != G)
      fail(where + ".sigma_d must have groups.count entries");
    for (double s : det.sigma_d)
      if (!finite_nonneg(s)) fail(where + ".sigma_d entries must be >= 0");
  }
}

MultigroupXS transpose_scattering(const MultigroupXS& xs) {
  MultigroupXS out = xs;
  for (auto& mat : out.materials) {
    const auto& src = mat.sigma_s;
    std::vector<std::vector<double>> t(src.size(), std::vector<double>(src.size()));
    for (std::size_t g = 0; g < src.size(); ++g)
      for (std::size_t gp = 0; gp < src.size(); ++gp) t[g][gp] = src[gp][g];
    mat.sigma_s = std::move(t);
  }
  return out;
}

CellGroupField source_density(const ProblemModel& model) {
  const int G = model.n_groups();
  CellGroupField q(model.mesh.cell_count(), G);
  const double vol = model.mesh.cell_volume();
  for (const auto& src : model.sources) {
    const double density = src.strength / (vol * static_cast<double>(src.cells.size()));
    for (int c : src.cells)
      for (int g = 0; g < G; ++g) q(c, g) += density * src.spectrum[g];
  }
  return q;
}

double total_source_strength(const ProblemModel& model) {
  double s = 0.0;
  for (const auto& src : model.sources) s += src.strength;
  return s;
}

CellGroupField response_density(const ProblemModel& model) {
  const int G = model.n_groups();
  CellGroupField r(model.mesh.cell_count(), G);
  for (const auto& det : model.detectors)
    for (int c : det.cells)
      for (int g = 0; g < G; ++g) r(c, g) += det.sigma_d[g];
  return r;
}

std::vector<int> detector_cells(const ProblemModel& model) {
  std::set<int> cells;
  for (const auto& det : model.detectors) cells.insert(det.cells.begin(), det.cells.end());
  return {cells.begin(), cells.end()};
}

}  // namespace hybridvr
