#include "hybridvr/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hybridvr {

QuadratureSet::QuadratureSet(std::vector<Direction> directions, std::vector<double> weights)
    : dirs_(std::move(directions)), weights_(std::move(weights)) {
  if (dirs_.size() != weights_.size())
    throw std::invalid_argument("quadrature: directions and weights differ in length");
  const int M = size();
  reflect_x_.resize(M);
  reflect_y_.resize(M);
  reverse_.resize(M);
  for (int m = 0; m < M; ++m) {
    const Direction& d = dirs_[m];
    reflect_x_[m] = find(-d.mu, d.eta, d.xi);
    reflect_y_[m] = find(d.mu, -d.eta, d.xi);
    reverse_[m] = find(-d.mu, -d.eta, -d.xi);
    const int q = d.mu > 0 ? (d.eta > 0 ? 0 : 3) : (d.eta > 0 ? 1 : 2);
    quadrants_[q].push_back(m);
  }
}

int QuadratureSet::find(double mu, double eta, double xi) const {
  for (int m = 0; m < size(); ++m) {
    const Direction& d = dirs_[m];
    if (std::abs(d.mu - mu) < 1e-13 && std::abs(d.eta - eta) < 1e-13 &&
        std::abs(d.xi - xi) < 1e-13)
      return m;
  }
  throw std::invalid_argument("quadrature set is not reflection-symmetric");
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[k] = -x;
    nodes[n - 1 - k] = x;
    weights[k] = w;
    weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

QuadratureSet build_quadrature(int n_polar, int n_azim) {
  if (n_polar < 1 || n_azim < 1)
    throw std::invalid_argument("quadrature: n_polar and n_azim must be >= 1 (got " +
                                std::to_string(n_polar) + ", " + std::to_string(n_azim) + ")");
  std::vector<double> xi, wxi;
  gauss_legendre(2 * n_polar, xi, wxi);

  const double pi = std::numbers::pi;
  const int n_phi = 4 * n_azim;
  const double w_phi = 2.0 * pi / n_phi;

  std::vector<Direction> dirs;
  std::vector<double> w;
  dirs.reserve(static_cast<std::size_t>(n_phi) * xi.size());
  for (std::size_t p = 0; p < xi.size(); ++p) {
    const double sin_theta = std::sqrt(1.0 - xi[p] * xi[p]);
    for (int quadrant = 0; quadrant < 4; ++quadrant) {
      for (int a = 0; a < n_azim; ++a) {
        // Midpoint azimuths in the first quadrant, mirrored exactly so the
        // reflection partners are bit-identical up to sign.
        const double phi = (a + 0.5) * (pi / 2.0) / n_azim;
        double c = std::cos(phi), s = std::sin(phi);
        if (quadrant == 1 || quadrant == 2) c = -c;
        if (quadrant == 2 || quadrant == 3) s = -s;
        dirs.push_back({sin_theta * c, sin_theta * s, xi[p]});
        w.push_back(wxi[p] * w_phi);
      }
    }
  }
  return QuadratureSet(std::move(dirs), std::move(w));
}

double angular_integrate(std::span<const double> values, const QuadratureSet& quad) {
  if (static_cast<int>(values.size()) != quad.size())
    throw std::invalid_argument("angular_integrate: field has " + std::to_string(values.size()) +
                                " entries, quadrature has " + std::to_string(quad.size()));
  double sum = 0.0;
  for (int m = 0; m < quad.size(); ++m) sum += quad.weight(m) * values[m];
  return sum;
}

}  // namespace hybridvr
