#include "pdgamma/grid.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace pdgamma {

Grid::Grid(int dim, std::vector<double> origin, std::vector<double> extent, std::vector<int> cells)
    : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
  if (origin.size() != static_cast<std::size_t>(dim) || extent.size() != static_cast<std::size_t>(dim) ||
      cells.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("grid origin/extent/cells must have one entry per axis");
  }
  size_ = 1;
  cell_volume_ = 1.0;
  for (int a = 0; a < dim; ++a) {
    if (cells[a] < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
    if (!(extent[a] > 0.0) || !std::isfinite(extent[a]) || !std::isfinite(origin[a])) {
      throw std::invalid_argument("grid extent must be positive and finite");
    }
    origin_[a] = origin[a];
    extent_[a] = extent[a];
    cells_[a] = cells[a];
    spacing_[a] = extent[a] / cells[a];
    cell_volume_ *= spacing_[a];
  }
  // Axis 0 varies fastest.
  std::size_t s = 1;
  for (int a = 0; a < kMaxDim; ++a) {
    stride_[a] = s;
    if (a < dim) s *= static_cast<std::size_t>(cells_[a]);
  }
  size_ = s;
}

GridPtr Grid::unit(int dim, int cells_per_axis) {
  return make_grid(dim, std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0),
                   std::vector<int>(dim, cells_per_axis));
}

GridPtr make_grid(int dim, std::vector<double> origin, std::vector<double> extent, std::vector<int> cells) {
  return std::make_shared<const Grid>(dim, std::move(origin), std::move(extent), std::move(cells));
}

double Grid::mean_spacing() const {
  double p = 1.0;
  for (int a = 0; a < dim_; ++a) p *= spacing_[a];
  return std::pow(p, 1.0 / dim_);
}

MultiIndex Grid::multi_index(std::size_t flat) const {
  MultiIndex idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(cells_[a]));
    flat /= static_cast<std::size_t>(cells_[a]);
  }
  return idx;
}

std::size_t Grid::flat_index(const MultiIndex& idx) const {
  std::size_t f = 0;
  for (int a = 0; a < dim_; ++a) f += static_cast<std::size_t>(idx[a]) * stride_[a];
  return f;
}

bool Grid::in_range(const MultiIndex& idx) const {
  for (int a = 0; a < dim_; ++a) {
    if (idx[a] < 0 || idx[a] >= cells_[a]) return false;
  }
  return true;
}

Vector Grid::node(std::size_t flat) const {
  Vector x(dim_);
  const MultiIndex idx = multi_index(flat);
  for (int a = 0; a < dim_; ++a) x[a] = origin_[a] + (idx[a] + 0.5) * spacing_[a];
  return x;
}

double Grid::node_coordinate(std::size_t flat, int axis) const {
  const auto i = (flat / stride_[axis]) % static_cast<std::size_t>(cells_[axis]);
  return origin_[axis] + (static_cast<double>(i) + 0.5) * spacing_[axis];
}

std::size_t Grid::nearest_node(const Vector& x) const {
  MultiIndex idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    const double t = std::floor((x[a] - origin_[a]) / spacing_[a]);
    idx[a] = static_cast<int>(std::clamp(t, 0.0, static_cast<double>(cells_[a] - 1)));
  }
  return flat_index(idx);
}

bool Grid::same_layout(const Grid& other) const {
  if (dim_ != other.dim_) return false;
  for (int a = 0; a < dim_; ++a) {
    if (cells_[a] != other.cells_[a] || origin_[a] != other.origin_[a] || extent_[a] != other.extent_[a]) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

SubdomainMask::SubdomainMask(GridPtr grid, std::vector<std::uint8_t> active, double collar_width)
    : grid_(std::move(grid)), active_(std::move(active)), collar_width_(collar_width) {
  if (!grid_) throw std::invalid_argument("subdomain mask needs a grid");
  if (active_.size() != grid_->size()) throw std::invalid_argument("mask size does not match grid");
  if (!(collar_width_ >= 0.0)) throw std::invalid_argument("collar width must be non-negative");
}

SubdomainMask SubdomainMask::full(GridPtr grid) {
  const auto n = grid->size();
  return SubdomainMask(std::move(grid), std::vector<std::uint8_t>(n, 1), 0.0);
}

SubdomainMask SubdomainMask::box(GridPtr grid, const Vector& lo, const Vector& hi, double collar_width) {
  std::vector<std::uint8_t> active(grid->size(), 0);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    bool inside = true;
    for (int a = 0; a < grid->dim(); ++a) {
      const double x = grid->node_coordinate(i, a);
      inside = inside && x > lo[a] && x < hi[a];
    }
    active[i] = inside ? 1 : 0;
  }
  return SubdomainMask(std::move(grid), std::move(active), collar_width);
}

std::size_t SubdomainMask::active_count() const {
  return static_cast<std::size_t>(std::count(active_.begin(), active_.end(), std::uint8_t{1}));
}

double SubdomainMask::measure() const { return static_cast<double>(active_count()) * grid_->cell_volume(); }

bool SubdomainMask::is_full() const { return active_count() == active_.size(); }

std::vector<std::uint8_t> SubdomainMask::collar() const {
  const Grid& g = *grid_;
  std::vector<std::uint8_t> flags(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) flags[i] = active_[i] ? 0 : 1;
  if (is_full() || collar_width_ <= 0.0) {
    return flags;
  }
  // Offsets strictly inside the collar radius.
  std::vector<MultiIndex> offsets;
  MultiIndex reach{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) reach[a] = static_cast<int>(std::ceil(collar_width_ / g.spacing(a)));
  for (int k = -reach[2]; k <= reach[2]; ++k) {
    for (int j = -reach[1]; j <= reach[1]; ++j) {
      for (int i = -reach[0]; i <= reach[0]; ++i) {
        const MultiIndex o{i, j, k};
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) r2 += (o[a] * g.spacing(a)) * (o[a] * g.spacing(a));
        if (r2 > 0.0 && std::sqrt(r2) < collar_width_) offsets.push_back(o);
      }
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!active_[i]) continue;
    const MultiIndex base = g.multi_index(i);
    for (const auto& o : offsets) {
      MultiIndex n{base[0] + o[0], base[1] + o[1], base[2] + o[2]};
      if (!g.in_range(n)) continue;
      if (!active_[g.flat_index(n)]) {
        flags[i] = 1;
        break;
      }
    }
  }
  return flags;
}

double SubdomainMask::active_diameter() const {
  const Grid& g = *grid_;
  std::array<double, kMaxDim> lo, hi;
  lo.fill(std::numeric_limits<double>::infinity());
  hi.fill(-std::numeric_limits<double>::infinity());
  bool any = false;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!active_[i]) continue;
    any = true;
    for (int a = 0; a < g.dim(); ++a) {
      const double x = g.node_coordinate(i, a);
      lo[a] = std::min(lo[a], x);
      hi[a] = std::max(hi[a], x);
    }
  }
  if (!any) return 0.0;
  double d2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) d2 += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  return std::sqrt(d2);
}

// ---------------------------------------------------------------------------

VectorField::VectorField(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("vector field needs a grid");
  values_.assign(grid_->size() * static_cast<std::size_t>(grid_->dim()), 0.0);
}

VectorField::VectorField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("vector field needs a grid");
  if (values_.size() != grid_->size() * static_cast<std::size_t>(grid_->dim())) {
    throw std::invalid_argument("vector field size does not match grid");
  }
  if (!all_finite()) throw DomainError("vector field contains non-finite values");
}

VectorField VectorField::sample(GridPtr grid, const std::function<Vector(const Vector&)>& f) {
  VectorField v(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) v.set(i, f(grid->node(i)));
  if (!v.all_finite()) throw DomainError("sampled field contains non-finite values");
  return v;
}

VectorField VectorField::identity(GridPtr grid) {
  return sample(grid, [](const Vector& x) { return x; });
}

Vector VectorField::value(std::size_t i) const {
  Vector x(dim());
  const auto s = at(i);
  for (int a = 0; a < dim(); ++a) x[a] = s[a];
  return x;
}

void VectorField::set(std::size_t i, const Vector& x) {
  auto s = at(i);
  for (int a = 0; a < dim(); ++a) s[a] = x[a];
}

bool VectorField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

Vector difference_quotient(const VectorField& v, std::size_t i, std::size_t j) {
  if (i == j) throw DomainError("difference quotient on the diagonal (coincident nodes)");
  const Grid& g = v.grid();
  const Vector dx = g.node(j) - g.node(i);
  const double r = dx.norm();
  if (r == 0.0) throw DomainError("difference quotient of coincident nodes");
  return (v.value(j) - v.value(i)) / r;
}

// ---------------------------------------------------------------------------

namespace {

std::string join(const std::vector<double>& xs) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t k = 0; k < xs.size(); ++k) os << (k ? " " : "") << xs[k];
  return os.str();
}

std::vector<double> split_numbers(const std::string& s) {
  std::istringstream is(s);
  std::vector<double> out;
  double x;
  while (is >> x) out.push_back(x);
  return out;
}

}  // namespace

void write_field_csv(std::ostream& out, const VectorField& v) {
  const Grid& g = v.grid();
  const int d = g.dim();
  std::vector<double> h(d), o(d), n(d);
  for (int a = 0; a < d; ++a) {
    h[a] = g.spacing(a);
    o[a] = g.origin(a);
    n[a] = g.cells(a);
  }
  out << "# dim=" << d << ",h=" << join(h) << ",origin=" << join(o) << ",cells=" << join(n) << "\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const MultiIndex idx = g.multi_index(i);
    for (int a = 0; a < d; ++a) out << idx[a] << ",";
    for (int a = 0; a < d; ++a) out << g.node_coordinate(i, a) << ",";
    const auto vi = v.at(i);
    for (int a = 0; a < d; ++a) out << vi[a] << (a + 1 < d ? "," : "\n");
  }
}

VectorField read_field_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ", 0) != 0) {
    throw std::invalid_argument("field CSV: missing '# dim=...' header");
  }
  std::map<std::string, std::string> kv;
  std::istringstream hs(header.substr(2));
  std::string item;
  while (std::getline(hs, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("field CSV: malformed header entry '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  for (const char* key : {"dim", "h", "origin", "cells"}) {
    if (!kv.count(key)) throw std::invalid_argument(std::string("field CSV: header lacks ") + key);
  }
  const int d = std::stoi(kv["dim"]);
  const auto h = split_numbers(kv["h"]);
  const auto o = split_numbers(kv["origin"]);
  const auto n = split_numbers(kv["cells"]);
  if (static_cast<int>(h.size()) != d || static_cast<int>(o.size()) != d || static_cast<int>(n.size()) != d) {
    throw std::invalid_argument("field CSV: header vectors do not match dim");
  }
  std::vector<double> extent(d);
  std::vector<int> cells(d);
  for (int a = 0; a < d; ++a) {
    cells[a] = static_cast<int>(std::lround(n[a]));
    extent[a] = h[a] * cells[a];
  }
  auto grid = make_grid(d, o, extent, cells);
  VectorField v(grid);
  std::vector<std::uint8_t> seen(grid->size(), 0);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(ls, cell, ',')) cols.push_back(std::stod(cell));
    if (static_cast<int>(cols.size()) != 3 * d) throw std::invalid_argument("field CSV: row has wrong column count");
    MultiIndex idx{0, 0, 0};
    for (int a = 0; a < d; ++a) idx[a] = static_cast<int>(std::lround(cols[a]));
    if (!grid->in_range(idx)) throw std::invalid_argument("field CSV: node index out of range");
    const auto f = grid->flat_index(idx);
    auto vi = v.at(f);
    for (int a = 0; a < d; ++a) vi[a] = cols[2 * d + a];
    seen[f] = 1;
    ++rows;
  }
  if (rows != grid->size() || std::count(seen.begin(), seen.end(), std::uint8_t{0}) != 0) {
    throw std::invalid_argument("field CSV: not every node has a row");
  }
  if (!v.all_finite()) throw DomainError("field CSV: non-finite values");
  return v;
}

}  // namespace pdgamma
