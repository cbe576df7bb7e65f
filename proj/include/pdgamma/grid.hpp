#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "pdgamma/types.hpp"

namespace pdgamma {

using MultiIndex = std::array<int, kMaxDim>;

// Uniform cell-centred Cartesian grid on a box in R^d. Node i sits at
// origin + (i + 1/2) h along every axis.
class Grid {
 public:
  Grid(int dim, std::vector<double> origin, std::vector<double> extent, std::vector<int> cells);

  // (0,1)^d with n cells per axis.
  static std::shared_ptr<const Grid> unit(int dim, int cells_per_axis);

  int dim() const { return dim_; }
  std::size_t size() const { return size_; }
  int cells(int axis) const { return cells_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double origin(int axis) const { return origin_[axis]; }
  double extent(int axis) const { return extent_[axis]; }
  double cell_volume() const { return cell_volume_; }
  // Representative spacing for isotropic quantities (geometric mean).
  double mean_spacing() const;

  MultiIndex multi_index(std::size_t flat) const;
  std::size_t flat_index(const MultiIndex& idx) const;
  bool in_range(const MultiIndex& idx) const;
  std::size_t stride(int axis) const { return stride_[axis]; }

  Vector node(std::size_t flat) const;
  double node_coordinate(std::size_t flat, int axis) const;
  std::size_t nearest_node(const Vector& x) const;

  bool same_layout(const Grid& other) const;

 private:
  int dim_;
  std::array<double, kMaxDim> origin_{};
  std::array<double, kMaxDim> extent_{};
  std::array<int, kMaxDim> cells_{1, 1, 1};
  std::array<double, kMaxDim> spacing_{1.0, 1.0, 1.0};
  std::array<std::size_t, kMaxDim> stride_{};
  std::size_t size_ = 0;
  double cell_volume_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int dim, std::vector<double> origin, std::vector<double> extent, std::vector<int> cells);

// Discrete subdomain A of the grid's box, plus the collar width r0 used by the
// Dirichlet problems: collar = {x : dist(x, Omega \ A) < r0}.
class SubdomainMask {
 public:
  SubdomainMask(GridPtr grid, std::vector<std::uint8_t> active, double collar_width);

  static SubdomainMask full(GridPtr grid);
  // Active nodes are those with lo < x < hi componentwise.
  static SubdomainMask box(GridPtr grid, const Vector& lo, const Vector& hi, double collar_width);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool active(std::size_t i) const { return active_[i] != 0; }
  const std::vector<std::uint8_t>& active_flags() const { return active_; }
  std::size_t active_count() const;
  double measure() const;
  double collar_width() const { return collar_width_; }
  bool is_full() const;

  // Flags nodes whose distance to the nearest inactive node is < r0
  // (inactive nodes included). Empty complement gives an empty collar.
  std::vector<std::uint8_t> collar() const;
  // Largest distance between active nodes.
  double active_diameter() const;

 private:
  GridPtr grid_;
  std::vector<std::uint8_t> active_;
  double collar_width_;
};

// Vector-valued nodal data (deformations v, displacements u, data g, loads l).
class VectorField {
 public:
  explicit VectorField(GridPtr grid);
  VectorField(GridPtr grid, std::vector<double> values);

  static VectorField sample(GridPtr grid, const std::function<Vector(const Vector&)>& f);
  static VectorField identity(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int dim() const { return grid_->dim(); }
  std::size_t size() const { return grid_->size(); }

  std::span<const double> at(std::size_t i) const {
    return {values_.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }
  std::span<double> at(std::size_t i) {
    return {values_.data() + i * static_cast<std::size_t>(dim()), static_cast<std::size_t>(dim())};
  }
  Vector value(std::size_t i) const;
  void set(std::size_t i, const Vector& x);

  const std::vector<double>& data() const { return values_; }
  std::vector<double>& data() { return values_; }

  bool all_finite() const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

// (v(x_j) - v(x_i)) / |x_j - x_i|.
Vector difference_quotient(const VectorField& v, std::size_t i, std::size_t j);

// Flat CSV layout: a header comment
//   # dim=<d>,h=<h1 .. hd>,origin=<o1 .. od>,cells=<n1 .. nd>
// then one row per node: i1,..,id,x1,..,xd,v1,..,vd
void write_field_csv(std::ostream& out, const VectorField& v);
VectorField read_field_csv(std::istream& in);

}  // namespace pdgamma
