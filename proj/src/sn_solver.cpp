#include "hybridvr/sn_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hybridvr/errors.hpp"

namespace hybridvr {

namespace {

constexpr double kFluxFloor = 1e-300;
constexpr double kBoundaryTol = 1e-14;
constexpr int kMaxBoundaryPasses = 100000;
constexpr double kFourPi = 4.0 * std::numbers::pi;

// Diamond difference for one cell and direction. in_x/in_y hold the incoming
// edge fluxes on entry and the outgoing ones on exit. Negative outgoing edge
// fluxes are set to zero and the cell average is recomputed from the cell
// balance equation, so fixups preserve balance.
inline double dd_cell(double s, double st, double ax, double ay, double& in_x, double& in_y,
                      long& fixups) {
  double psi = (s + ax * in_x + ay * in_y) / (st + ax + ay);
  double ox = 2.0 * psi - in_x;
  double oy = 2.0 * psi - in_y;
  if (ox < 0.0 || oy < 0.0) {
    ++fixups;
    bool zx = ox < 0.0;
    bool zy = oy < 0.0;
    for (;;) {
      const double num = s + (zx ? 0.5 : 1.0) * ax * in_x + (zy ? 0.5 : 1.0) * ay * in_y;
      const double den = st + (zx ? 0.0 : ax) + (zy ? 0.0 : ay);
      psi = den > 0.0 ? num / den : 0.0;
      ox = zx ? 0.0 : 2.0 * psi - in_x;
      oy = zy ? 0.0 : 2.0 * psi - in_y;
      if (ox < 0.0) {
        zx = true;
        continue;
      }
      if (oy < 0.0) {
        zy = true;
        continue;
      }
      break;
    }
  }
  in_x = ox;
  in_y = oy;
  return psi;
}

// Step-characteristic coefficients for one material and direction. Edge and
// cell-average fluxes are linear in the incoming edge fluxes a (x face) and
// b (y face) and the emission density q.
struct ScCoeffs {
  double xa, xb, xq;  // outgoing x-face flux
  double ya, yb, yq;  // outgoing y-face flux
  double ca, cb, cq;  // cell average
};

// Path-attenuation moments g = (1 - e)/t, h = (1 - (1 + t) e)/t^2 and
// m = (2 - t - (2 + t) e)/t^3 with e = exp(-t), by series for small t.
void sc_moments(double t, double& e, double& g, double& h, double& m) {
  e = std::exp(-t);
  if (t < 1.0) {
    g = h = m = 0.0;
    double term = 1.0;  // (-t)^n / n!
    for (int n = 0; n < 30; ++n) {
      g += term / (n + 1);
      h += term * (n + 1) / ((n + 1.0) * (n + 2.0));
      m -= term * (n + 1) / ((n + 1.0) * (n + 2.0) * (n + 3.0));
      term *= -t / (n + 1);
    }
    return;
  }
  g = -std::expm1(-t) / t;
  h = (1.0 - (1.0 + t) * e) / (t * t);
  m = (2.0 - t - (2.0 + t) * e) / (t * t * t);
}

// px = |mu| / dx and py = |eta| / dy. The characteristic through the inflow
// corner splits the cell; the faster-crossed axis is treated as primary.
ScCoeffs sc_coefficients(double sigma, double px, double py) {
  const bool x_primary = py <= px;
  const double p = x_primary ? px : py;
  const double r = (x_primary ? py : px) / p;
  double e, g, h, m;
  sc_moments(sigma / p, e, g, h, m);
  const double k = g - h;
  // Outgoing primary face, outgoing secondary face and cell average, with
  // "u" the primary-axis inflow and "v" the other.
  const double pu = (1.0 - r) * e, pv = r * g, pq = (r * k + (1.0 - r) * g) / p;
  const double su = g, sv = 0.0, sq = k / p;
  const double cu = g - r * h, cv = r * k, cq = (k + r * m) / p;
  if (x_primary) return {pu, pv, pq, su, sv, sq, cu, cv, cq};
  return {sv, su, sq, pv, pu, pq, cv, cu, cq};
}

// Sweeps one group over all directions. Keeps the boundary edge fluxes
// between calls so reflective boundaries warm-start from the previous sweep.
class Sweeper {
 public:
  Sweeper(const Mesh& mesh, const QuadratureSet& quad, SpatialScheme scheme)
      : mesh_(mesh), quad_(quad), scheme_(scheme) {
    const std::size_t M = static_cast<std::size_t>(quad.size());
    for (int f = 0; f < 4; ++f) {
      const std::size_t edges = f < 2 ? mesh.ny : mesh.nx;
      in_[f].assign(edges * M, 0.0);
      out_[f].assign(edges * M, 0.0);
    }
    col_.assign(static_cast<std::size_t>(mesh.nx) * M, 0.0);
    for (int c = 0; c < mesh.cell_count(); ++c) {
      const int mat = mesh.cell_material[c];
      if (mat >= static_cast<int>(first_cell_.size())) first_cell_.resize(mat + 1, -1);
      if (first_cell_[mat] < 0) first_cell_[mat] = c;
    }
    reflective_ = std::any_of(mesh.boundary.begin(), mesh.boundary.end(),
                              [](Boundary b) { return b == Boundary::reflective; });
  }

  // emission is per cell, or per cell and direction when per_direction is
  // set, in particles per steradian. psi is [cell][direction].
  long sweep(std::span<const double> sig_t, std::span<const double> emission, bool per_direction,
             std::span<double> psi, std::array<double, 4>& outflow,
             std::array<double, 4>& inflow) {
    long fixups = 0;
    for (int pass = 0; pass < kMaxBoundaryPasses; ++pass) {
      fixups = one_pass(sig_t, emission, per_direction, psi);
      currents(outflow, inflow);
      if (!reflective_ || !update_reflective_inflow()) break;
    }
    return fixups;
  }

 private:
  long one_pass(std::span<const double> sig_t, std::span<const double> emission,
                bool per_direction, std::span<double> psi) {
    const int nx = mesh_.nx;
    const int ny = mesh_.ny;
    const int M = quad_.size();
    const double dx = mesh_.dx();
    const double dy = mesh_.dy();
    long fixups = 0;

    std::vector<double> ax, ay, row;
    for (int q = 0; q < 4; ++q) {
      const std::vector<int>& dirs = quad_.quadrant(q);
      const int K = static_cast<int>(dirs.size());
      if (K == 0) continue;
      const bool east = (q == 0 || q == 3);   // mu > 0: enters from west
      const bool north = (q == 0 || q == 1);  // eta > 0: enters from south
      const int fx_in = east ? 0 : 1, fx_out = east ? 1 : 0;
      const int fy_in = north ? 2 : 3, fy_out = north ? 3 : 2;

      ax.resize(K);
      ay.resize(K);
      row.resize(K);
      for (int k = 0; k < K; ++k) {
        const Direction& d = quad_.direction(dirs[k]);
        ax[k] = 2.0 * std::abs(d.mu) / dx;
        ay[k] = 2.0 * std::abs(d.eta) / dy;
      }
      const bool sc = scheme_ == SpatialScheme::step_characteristic;
      if (sc) {
        coeffs_.resize(first_cell_.size() * K);
        for (std::size_t mat = 0; mat < first_cell_.size(); ++mat) {
          if (first_cell_[mat] < 0) continue;
          for (int k = 0; k < K; ++k)
            coeffs_[mat * K + k] =
                sc_coefficients(sig_t[first_cell_[mat]], ax[k] / 2.0, ay[k] / 2.0);
        }
      }
      for (int i = 0; i < nx; ++i)
        for (int k = 0; k < K; ++k)
          col_[static_cast<std::size_t>(i) * K + k] = in_[fy_in][static_cast<std::size_t>(i) * M + dirs[k]];

      for (int jj = 0; jj < ny; ++jj) {
        const int j = north ? jj : ny - 1 - jj;
        for (int k = 0; k < K; ++k) row[k] = in_[fx_in][static_cast<std::size_t>(j) * M + dirs[k]];
        for (int ii = 0; ii < nx; ++ii) {
          const int i = east ? ii : nx - 1 - ii;
          const int c = j * nx + i;
          const double st = sig_t[c];
          double* col = col_.data() + static_cast<std::size_t>(i) * K;
          double* out = psi.data() + static_cast<std::size_t>(c) * M;
          if (sc) {
            const ScCoeffs* cf =
                coeffs_.data() + static_cast<std::size_t>(mesh_.cell_material[c]) * K;
            const double* src = emission.data() + static_cast<std::size_t>(c) * M;
            for (int k = 0; k < K; ++k) {
              const double q = per_direction ? src[dirs[k]] : emission[c];
              const ScCoeffs& f = cf[k];
              const double a = row[k], b = col[k];
              out[dirs[k]] = f.ca * a + f.cb * b + f.cq * q;
              row[k] = f.xa * a + f.xb * b + f.xq * q;
              col[k] = f.ya * a + f.yb * b + f.yq * q;
            }
          } else if (per_direction) {
            const double* src = emission.data() + static_cast<std::size_t>(c) * M;
            for (int k = 0; k < K; ++k)
              out[dirs[k]] = dd_cell(src[dirs[k]], st, ax[k], ay[k], row[k], col[k], fixups);
          } else {
            const double s = emission[c];
            for (int k = 0; k < K; ++k)
              out[dirs[k]] = dd_cell(s, st, ax[k], ay[k], row[k], col[k], fixups);
          }
        }
        for (int k = 0; k < K; ++k) out_[fx_out][static_cast<std::size_t>(j) * M + dirs[k]] = row[k];
      }
      for (int i = 0; i < nx; ++i)
        for (int k = 0; k < K; ++k)
          out_[fy_out][static_cast<std::size_t>(i) * M + dirs[k]] = col_[static_cast<std::size_t>(i) * K + k];
    }
    return fixups;
  }

  void currents(std::array<double, 4>& outflow, std::array<double, 4>& inflow) const {
    const int M = quad_.size();
    for (int f = 0; f < 4; ++f) {
      const bool xface = f < 2;
      const int edges = xface ? mesh_.ny : mesh_.nx;
      const double len = xface ? mesh_.dy() : mesh_.dx();
      double o = 0.0, in = 0.0;
      for (int m = 0; m < M; ++m) {
        const Direction& d = quad_.direction(m);
        const double n = xface ? (f == 0 ? -d.mu : d.mu) : (f == 2 ? -d.eta : d.eta);
        const double wc = quad_.weight(m) * std::abs(n) * len;
        double sum = 0.0;
        if (n > 0.0) {
          for (int e = 0; e < edges; ++e) sum += out_[f][static_cast<std::size_t>(e) * M + m];
          o += wc * sum;
        } else {
          for (int e = 0; e < edges; ++e) sum += in_[f][static_cast<std::size_t>(e) * M + m];
          in += wc * sum;
        }
      }
      outflow[f] = o;
      inflow[f] = in;
    }
  }

  // Copies mirrored outgoing fluxes into the reflective inflows. Returns
  // true while another pass is needed.
  bool update_reflective_inflow() {
    const int M = quad_.size();
    double diff = 0.0, scale = 0.0;
    for (int f = 0; f < 4; ++f) {
      if (mesh_.boundary[f] != Boundary::reflective) continue;
      const bool xface = f < 2;
      const int edges = xface ? mesh_.ny : mesh_.nx;
      for (int m = 0; m < M; ++m) {
        const Direction& d = quad_.direction(m);
        const double n = xface ? (f == 0 ? -d.mu : d.mu) : (f == 2 ? -d.eta : d.eta);
        if (n > 0.0) continue;  // outgoing through this face
        const int mirror = xface ? quad_.reflect_x(m) : quad_.reflect_y(m);
        for (int e = 0; e < edges; ++e) {
          const std::size_t k = static_cast<std::size_t>(e) * M;
          const double v = out_[f][k + mirror];
          diff = std::max(diff, std::abs(v - in_[f][k + m]));
          scale = std::max(scale, std::abs(v));
          in_[f][k + m] = v;
        }
      }
    }
    return diff > kBoundaryTol * scale;
  }

  const Mesh& mesh_;
  const QuadratureSet& quad_;
  SpatialScheme scheme_;
  std::vector<int> first_cell_;
  std::vector<ScCoeffs> coeffs_;
  std::array<std::vector<double>, 4> in_;
  std::array<std::vector<double>, 4> out_;
  std::vector<double> col_;
  bool reflective_ = false;
};

std::vector<double> group_sigma_t(const ProblemModel& model, const MultigroupXS& xs, int g) {
  std::vector<double> st(static_cast<std::size_t>(model.mesh.cell_count()));
  for (int c = 0; c < model.mesh.cell_count(); ++c)
    st[c] = xs.materials[model.mesh.cell_material[c]].sigma_t[g];
  return st;
}

bool all_zero(const CellGroupField& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](double v) { return v == 0.0; });
}

}  // namespace

std::string_view to_string(SpatialScheme scheme) {
  return scheme == SpatialScheme::step_characteristic ? "sc" : "dd";
}

std::optional<SpatialScheme> parse_spatial_scheme(std::string_view text) {
  if (text == "sc") return SpatialScheme::step_characteristic;
  if (text == "dd") return SpatialScheme::diamond_difference;
  return std::nullopt;
}

SweepResult sweep_once(const ProblemModel& model, const QuadratureSet& quad, int group,
                       std::span<const double> total_source, SpatialScheme scheme) {
  const int C = model.mesh.cell_count();
  const int M = quad.size();
  if (group < 0 || group >= model.n_groups())
    throw std::invalid_argument("sweep_once: group out of range");
  if (static_cast<int>(total_source.size()) != C * M)
    throw std::invalid_argument("sweep_once: source must have cells*directions entries");
  SweepResult r;
  r.psi.assign(static_cast<std::size_t>(C) * M, 0.0);
  Sweeper sweeper(model.mesh, quad, scheme);
  const auto st = group_sigma_t(model, model.xs, group);
  r.fixups = sweeper.sweep(st, total_source, true, r.psi, r.outflow, r.inflow);
  return r;
}

ScalarFluxField scalar_flux(const AngularFluxField& flux, const QuadratureSet& quad) {
  if (flux.directions() != quad.size())
    throw std::invalid_argument("scalar_flux: quadrature does not match angular flux");
  ScalarFluxField phi(flux.cells(), flux.groups());
  for (int g = 0; g < flux.groups(); ++g)
    for (int c = 0; c < flux.cells(); ++c) phi(c, g) = angular_integrate(flux.at(c, g), quad);
  return phi;
}

SolveResult solve(const ProblemModel& model, const QuadratureSet& quad, TransportMode mode,
                  const std::optional<CellGroupField>& adjoint_source,
                  const SolveOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve: tol must be > 0");
  if (options.max_iters < 1) throw std::invalid_argument("solve: max_iters must be >= 1");

  const Mesh& mesh = model.mesh;
  const int C = mesh.cell_count();
  const int G = model.n_groups();
  const int M = quad.size();
  const bool adjoint = mode == TransportMode::adjoint;

  const MultigroupXS xs = adjoint ? transpose_scattering(model.xs) : model.xs;
  CellGroupField source;
  if (!adjoint) {
    source = source_density(model);
  } else {
    source = adjoint_source ? *adjoint_source : response_density(model);
    if (source.cells() != C || source.groups() != G)
      throw SolverError("adjoint source has shape " + std::to_string(source.cells()) + "x" +
                        std::to_string(source.groups()) + ", model needs " + std::to_string(C) +
                        "x" + std::to_string(G));
    if (all_zero(source)) throw SolverError("no adjoint source");
  }

  std::vector<int> order(G);
  for (int k = 0; k < G; ++k) order[k] = adjoint ? G - 1 - k : k;

  // Scattering from a group swept later back into an earlier one needs outer
  // iterations.
  bool upscatter = false;
  for (const auto& mat : xs.materials)
    for (int a = 0; a < G; ++a)
      for (int b = a + 1; b < G; ++b)
        if (mat.sigma_s[order[b]][order[a]] > 0.0) upscatter = true;

  std::vector<std::vector<double>> sig_t(G), sig_self(G);
  std::vector<bool> has_self(G, false);
  for (int g = 0; g < G; ++g) {
    sig_t[g] = group_sigma_t(model, xs, g);
    sig_self[g].resize(C);
    for (int c = 0; c < C; ++c) {
      sig_self[g][c] = xs.materials[mesh.cell_material[c]].sigma_s[g][g];
      if (sig_self[g][c] > 0.0) has_self[g] = true;
    }
  }

  SolveResult result;
  AngularFluxField chi(C, G, M, mode);
  CellGroupField phi(C, G);
  SolveReport& report = result.report;
  report.iterations.assign(G, 0);

  std::vector<Sweeper> sweepers;
  sweepers.reserve(G);
  for (int g = 0; g < G; ++g) sweepers.emplace_back(mesh, quad, options.scheme);

  std::vector<double> external(C), emission(C), phi_new(C);
  std::vector<long> group_fixups(G, 0);
  bool converged = false;
  for (int outer = 0; outer < options.max_iters; ++outer) {
    report.outer_iterations = outer + 1;
    CellGroupField phi_outer = phi;
    bool inner_ok = true;
    double inner_change = 0.0;
    double pass_change = 0.0;
    for (int g : order) {
      for (int c = 0; c < C; ++c) {
        const auto& row_mat = xs.materials[mesh.cell_material[c]];
        double s = source(c, g);
        for (int gp = 0; gp < G; ++gp)
          if (gp != g) s += row_mat.sigma_s[gp][g] * phi(c, gp);
        external[c] = s;
      }
      bool group_ok = false;
      for (int it = 0; it < options.max_iters; ++it) {
        for (int c = 0; c < C; ++c) emission[c] = (external[c] + sig_self[g][c] * phi(c, g)) / kFourPi;
        std::array<double, 4> outflow{}, inflow{};
        group_fixups[g] = sweepers[g].sweep(sig_t[g], emission, false, chi.group(g), outflow, inflow);
        for (int f = 0; f < 4; ++f) {
          chi.outflow[f][g] = outflow[f];
          chi.inflow[f][g] = inflow[f];
        }
        double change = 0.0;
        for (int c = 0; c < C; ++c) {
          phi_new[c] = angular_integrate(chi.at(c, g), quad);
          change = std::max(change, std::abs(phi_new[c] - phi(c, g)) / std::max(phi_new[c], kFluxFloor));
          phi(c, g) = phi_new[c];
        }
        ++report.iterations[g];
        inner_change = change;
        if (!has_self[g] || change < options.tol) {
          group_ok = true;
          break;
        }
      }
      pass_change = std::max(pass_change, inner_change);
      report.max_rel_change = pass_change;
      inner_ok = inner_ok && group_ok;
    }
    if (!upscatter) {
      converged = inner_ok;
      break;
    }
    double outer_change = 0.0;
    for (int c = 0; c < C; ++c)
      for (int g = 0; g < G; ++g)
        outer_change = std::max(outer_change,
                                std::abs(phi(c, g) - phi_outer(c, g)) / std::max(phi(c, g), kFluxFloor));
    report.max_rel_change = outer_change;
    if (inner_ok && outer_change < options.tol) {
      converged = true;
      break;
    }
  }
  report.converged = converged;
  report.fixups = 0;
  for (long f : group_fixups) report.fixups += f;

  if (adjoint) {
    AngularFluxField rev(C, G, M, mode);
    for (int g = 0; g < G; ++g)
      for (int c = 0; c < C; ++c) {
        auto dst = rev.at(c, g);
        auto src = chi.at(c, g);
        for (int m = 0; m < M; ++m) dst[m] = src[quad.reverse(m)];
      }
    rev.outflow = chi.outflow;
    rev.inflow = chi.inflow;
    result.angular = std::move(rev);
  } else {
    result.angular = std::move(chi);
  }
  result.scalar = std::move(phi);
  report.balance_residual = balance_check(model, quad, result.angular, source);
  return result;
}

std::vector<double> balance_check(const ProblemModel& model, const QuadratureSet& quad,
                                  const AngularFluxField& flux, const CellGroupField& source) {
  const Mesh& mesh = model.mesh;
  const int C = mesh.cell_count();
  const int G = model.n_groups();
  if (flux.cells() != C || flux.groups() != G || !source.same_shape(CellGroupField(C, G)))
    throw std::invalid_argument("balance_check: field dimensions do not match the model");
  const MultigroupXS xs =
      flux.sense() == TransportMode::adjoint ? transpose_scattering(model.xs) : model.xs;
  const ScalarFluxField phi = scalar_flux(flux, quad);
  const double vol = mesh.cell_volume();

  std::vector<double> residual(G, 0.0);
  for (int g = 0; g < G; ++g) {
    double src = 0.0, in = 0.0, absorbed = 0.0, out = 0.0;
    for (int c = 0; c < C; ++c) {
      const Material& mat = xs.materials[mesh.cell_material[c]];
      src += source(c, g);
      double sin = 0.0, sout = 0.0;
      for (int gp = 0; gp < G; ++gp) {
        if (gp == g) continue;
        sin += mat.sigma_s[gp][g] * phi(c, gp);
        sout += mat.sigma_s[g][gp];
      }
      in += sin;
      out += sout * phi(c, g);
      absorbed += mat.absorption(g) * phi(c, g);
    }
    src *= vol;
    in *= vol;
    out *= vol;
    absorbed *= vol;
    double leak = 0.0;
    for (int f = 0; f < 4; ++f) leak += flux.outflow[f][g] - flux.inflow[f][g];
    const double imbalance = std::abs(src + in - absorbed - out - leak);
    const double production = src + in;
    residual[g] = production > 0.0 ? imbalance / production : imbalance;
  }
  return residual;
}

double response(const ScalarFluxField& flux, const CellGroupField& weight, const Mesh& mesh) {
  if (!flux.same_shape(weight) || flux.cells() != mesh.cell_count())
    throw std::invalid_argument("response: flux, weight field and mesh dimensions differ");
  const double vol = mesh.cell_volume();
  double r = 0.0;
  for (int c = 0; c < flux.cells(); ++c)
    for (int g = 0; g < flux.groups(); ++g) r += flux(c, g) * weight(c, g) * vol;
  return r;
}

}  // namespace hybridvr
