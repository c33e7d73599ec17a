#ifndef HYBRIDVR_FIELDS_HPP
#define HYBRIDVR_FIELDS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace hybridvr {

// Per-cell, per-group values. Used for scalar fluxes, source densities,
// response cross sections and adjoint sources.
class CellGroupField {
 public:
  CellGroupField() = default;
  CellGroupField(int cells, int groups, double fill = 0.0)
      : cells_(cells),
        groups_(groups),
        data_(static_cast<std::size_t>(cells) * groups, fill) {}

  int cells() const { return cells_; }
  int groups() const { return groups_; }

  double& operator()(int c, int g) { return data_[flat(c, g)]; }
  double operator()(int c, int g) const { return data_[flat(c, g)]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const CellGroupField& o) const {
    return cells_ == o.cells_ && groups_ == o.groups_;
  }

  bool operator==(const CellGroupField&) const = default;

 private:
  std::size_t flat(int c, int g) const {
    return static_cast<std::size_t>(c) * groups_ + g;
  }

  int cells_ = 0;
  int groups_ = 0;
  std::vector<double> data_;
};

using ScalarFluxField = CellGroupField;

}  // namespace hybridvr

#endif  // HYBRIDVR_FIELDS_HPP
