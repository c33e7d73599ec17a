#ifndef HYBRIDVR_QUADRATURE_HPP
#define HYBRIDVR_QUADRATURE_HPP

#include <array>
#include <span>
#include <vector>

namespace hybridvr {

// Unit direction; mu and eta are the in-plane (x, y) cosines, xi the
// polar cosine along z.
struct Direction {
  double mu = 0.0;
  double eta = 0.0;
  double xi = 0.0;
};

// Product quadrature over the unit sphere with weights summing to 4*pi.
class QuadratureSet {
 public:
  QuadratureSet(std::vector<Direction> directions, std::vector<double> weights);

  int size() const { return static_cast<int>(dirs_.size()); }
  const Direction& direction(int m) const { return dirs_[m]; }
  double weight(int m) const { return weights_[m]; }
  std::span<const double> weights() const { return weights_; }

  // Index of the partner direction with mu negated (reflection through a
  // face of constant x), with eta negated, and with the whole vector negated.
  int reflect_x(int m) const { return reflect_x_[m]; }
  int reflect_y(int m) const { return reflect_y_[m]; }
  int reverse(int m) const { return reverse_[m]; }

  // Directions grouped by in-plane quadrant: 0 (+mu,+eta), 1 (-mu,+eta),
  // 2 (-mu,-eta), 3 (+mu,-eta).
  const std::vector<int>& quadrant(int q) const { return quadrants_[q]; }

 private:
  int find(double mu, double eta, double xi) const;

  std::vector<Direction> dirs_;
  std::vector<double> weights_;
  std::vector<int> reflect_x_;
  std::vector<int> reflect_y_;
  std::vector<int> reverse_;
  std::array<std::vector<int>, 4> quadrants_;
};

// Gauss-Legendre nodes and weights on [-1, 1], ascending nodes.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Chebyshev (equal-weight azimuth) x Gauss-Legendre (polar) product set with
// n_polar levels per z-hemisphere and n_azim azimuths per in-plane quadrant,
// 8 * n_polar * n_azim directions in total. Throws std::invalid_argument for
// zero counts.
QuadratureSet build_quadrature(int n_polar, int n_azim);

// Sum_m w[m] * values[m]. Throws std::invalid_argument on length mismatch.
double angular_integrate(std::span<const double> values, const QuadratureSet& quad);

}  // namespace hybridvr

#endif  // HYBRIDVR_QUADRATURE_HPP
