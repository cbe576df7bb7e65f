#include "pdgamma/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdgamma/parallel.hpp"

namespace pdgamma {

double sawtooth_value(int N, double x) {
  if (N < 1) throw std::invalid_argument("sawtooth needs N >= 1");
  const double y = x * N;
  const double tau = y - std::floor(y);
  return (tau < 0.5 ? tau : 1.0 - tau) / N;
}

VectorField sawtooth_field(int N, const GridPtr& grid) {
  if (N < 1) throw std::invalid_argument("sawtooth needs N >= 1");
  if (grid->dim() != 1) throw std::invalid_argument("sawtooth field lives on a 1D grid");
  if (grid->cells(0) < 8 * N * grid->extent(0) - 1e-9) {
    throw std::invalid_argument("grid does not resolve the teeth (need >= 8N cells per unit length)");
  }
  VectorField v(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) v.at(i)[0] = sawtooth_value(N, grid->node_coordinate(i, 0));
  return v;
}

SawtoothReport sawtooth_energy(int N, double delta, double h) {
  if (N < 1) throw std::invalid_argument("sawtooth needs N >= 1");
  if (!(delta > 0.0) || !(h > 0.0)) throw std::invalid_argument("delta and h must be positive");
  const long inner_cells = std::max<long>(std::lround(1.0 / h), 8L * N);
  const double hh = 1.0 / static_cast<double>(inner_cells);
  const int ghost = static_cast<int>(std::ceil(delta / hh)) + 1;
  const int cells = static_cast<int>(inner_cells) + 2 * ghost;
  const GridPtr grid = make_grid(1, {-ghost * hh}, {cells * hh}, {cells});

  VectorField v(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) v.at(i)[0] = sawtooth_value(N, grid->node_coordinate(i, 0));
  std::vector<std::uint8_t> outer(grid->size(), 0), all(grid->size(), 1);
  for (int i = ghost; i < ghost + static_cast<int>(inner_cells); ++i) outer[static_cast<std::size_t>(i)] = 1;

  const RadialProfile rho = make_rescaled(make_box(1), delta).profile();
  const Potential phi = Potential::power(2.0, 4.0);

  SawtoothReport rep;
  rep.N = N;
  rep.delta = delta;
  rep.energy = energy_Fn_cross(v, outer, all, rho, phi, 2.0);
  rep.interior_value = energy_Fn_cross(v, outer, outer, rho, phi, 2.0).value;
  rep.closed_form = 8.0 / 15.0 * N * delta;
  rep.rel_error = std::abs(rep.energy.value - rep.closed_form) / rep.closed_form;
  rep.in_regime = delta <= 1.0 / (4.0 * N);
  return rep;
}

double laminate_gamma(double lambda, double t) {
  const double tau = t - std::floor(t);
  if (tau <= 0.5 * (1.0 + lambda)) return (1.0 - lambda) * tau;
  return (-1.0 - lambda) * (tau - 1.0);
}

namespace {

void check_lambda(const Vector& lambda) {
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (!(lambda[i] >= 0.0 && lambda[i] <= 1.0)) {
      throw std::invalid_argument("laminate singular values must lie in [0, 1]");
    }
  }
}

}  // namespace

VectorField laminate_field(const LaminateSpec& spec, const GridPtr& grid) {
  check_lambda(spec.lambda);
  if (spec.lambda.size() != grid->dim()) throw std::invalid_argument("lambda must have one entry per axis");
  if (spec.k < 1) throw std::invalid_argument("laminate frequency k must be >= 1");
  for (int a = 0; a < grid->dim(); ++a) {
    if (grid->cells(a) < 8 * spec.k * grid->extent(a) - 1e-9) {
      throw std::invalid_argument("grid does not resolve the laminate (need >= 8k cells per unit length)");
    }
  }
  VectorField v(grid);
  const double k = spec.k;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    auto out = v.at(i);
    for (int a = 0; a < grid->dim(); ++a) {
      const double x = grid->node_coordinate(i, a);
      out[a] = spec.lambda[a] * x + laminate_gamma(spec.lambda[a], k * x) / k;
    }
  }
  return v;
}

std::vector<LaminateDecayRow> laminate_energy_decay(const Vector& lambda, const LaminateSweep& sweep,
                                                    const Potential& phi, double m) {
  check_lambda(lambda);
  const int d = static_cast<int>(lambda.size());
  if (d < 1 || d > 2) throw Unsupported("laminate energies are computed for d = 1, 2");
  std::vector<LaminateDecayRow> rows;
  for (int n : sweep.n) {
    LaminateDecayRow row;
    row.n = n;
    row.k = sweep.k(n);
    row.delta = sweep.delta(n);
    const double want = row.delta / sweep.cells_per_delta;
    int cells = std::max(8 * row.k, static_cast<int>(std::ceil(1.0 / want - 1e-9)));
    cells = std::min(cells, std::max(sweep.max_cells, 8 * row.k));
    const GridPtr grid = Grid::unit(d, cells);
    row.h = grid->spacing(0);
    const VectorField v = laminate_field({lambda, row.k}, grid);
    const RadialProfile rho = make_rescaled(make_box(d), row.delta).profile();
    row.energy = energy_Fn(v, SubdomainMask::full(grid), rho, phi, m).value;
    rows.push_back(row);
  }
  return rows;
}

RigidityResult rigidity_reconstruct(const VectorField& v, double R) {
  const Grid& g = v.grid();
  const int d = g.dim();
  if (!(R > 0.0)) throw std::invalid_argument("reconstruction radius must be positive");
  double half_diag = 0.0;
  for (int a = 0; a < d; ++a) half_diag += 0.25 * g.spacing(a) * g.spacing(a);
  half_diag = std::sqrt(half_diag) * (1.0 + 1e-12);
  auto node_near = [&](const Vector& target) {
    const std::size_t i = g.nearest_node(target);
    if ((g.node(i) - target).norm() > half_diag) {
      throw DomainError("reconstruction point lies outside the grid");
    }
    return i;
  };
  const std::size_t i0 = node_near(Vector::Zero(d));
  const Vector x0 = g.node(i0), v0 = v.value(i0);
  Matrix dX(d, d), dV(d, d);
  for (int k = 0; k < d; ++k) {
    Vector target = Vector::Zero(d);
    target[k] = R;
    const std::size_t ik = node_near(target);
    dX.col(k) = g.node(ik) - x0;
    dV.col(k) = v.value(ik) - v0;
  }
  RigidityResult res;
  // F dX = dV
  res.F = dX.transpose().fullPivLu().solve(dV.transpose()).transpose();
  res.b = v0 - res.F * x0;
  res.orthogonality_error = (res.F.transpose() * res.F - Matrix::Identity(d, d)).norm();

  const std::size_t n = g.size();
  const std::size_t stride = std::max<std::size_t>(1, (n + 255) / 256);
  std::vector<std::size_t> sample;
  for (std::size_t i = 0; i < n; i += stride) sample.push_back(i);
  double resid = 0.0, affine = 0.0;
  for (std::size_t a = 0; a < sample.size(); ++a) {
    const Vector xa = g.node(sample[a]), va = v.value(sample[a]);
    for (std::size_t b = a + 1; b < sample.size(); ++b) {
      const Vector xb = g.node(sample[b]), vb = v.value(sample[b]);
      resid = std::max(resid, std::abs((va - vb).norm() - (xa - xb).norm()));
    }
  }
  for (std::size_t i = 0; i < n; ++i) affine = std::max(affine, (v.value(i) - res.F * g.node(i) - res.b).norm());
  res.residual = resid;
  res.affine_residual = affine;
  return res;
}

std::string to_string(RigidityVerdict v) {
  switch (v) {
    case RigidityVerdict::rigid:
      return "rigid";
    case RigidityVerdict::not_rigid:
      return "not_rigid";
    case RigidityVerdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

EnergyDecayRigidity energy_decay_rigidity(const std::vector<VectorField>& seq, const RadialProfile& rho,
                                          const Potential& phi, double m, double R) {
  if (seq.empty()) throw std::invalid_argument("energy-decay rigidity needs a non-empty sequence");
  if (!(rho.value(rho.support * 1e-3) > 0.0)) {
    throw std::invalid_argument("kernel must be positive on a ball around the origin");
  }
  EnergyDecayRigidity out;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    const VectorField& v = seq[j];
    out.energies.push_back(energy_Fn(v, SubdomainMask::full(v.grid_ptr()), rho, phi, m).value);
    if (j > 0) {
      if (!v.grid().same_layout(seq[j - 1].grid())) throw std::invalid_argument("sequence fields must share a grid");
      std::vector<double> diff(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) diff[i] = (v.value(i) - seq[j - 1].value(i)).norm();
      out.l1_steps.push_back(pairwise_sum(diff) * v.grid().cell_volume());
    }
  }
  const VectorField& last = seq.back();
  out.tolerance = 10.0 * last.grid().mean_spacing();
  for (std::size_t j = 1; j < out.energies.size(); ++j) {
    if (out.energies[j] > out.energies[j - 1] * (1.0 + 1e-12) + 1e-300) {
      out.verdict = RigidityVerdict::inconclusive;
      out.reason = "energies are not decreasing";
      return out;
    }
  }
  const double first = out.energies.front(), final_energy = out.energies.back();
  if (!(final_energy <= 1e-2 * first || final_energy <= 1e-14)) {
    out.verdict = RigidityVerdict::inconclusive;
    out.reason = "energies do not tend to zero";
    return out;
  }
  out.terminal = rigidity_reconstruct(last, R);
  const bool ok = out.terminal.orthogonality_error <= out.tolerance && out.terminal.affine_residual <= out.tolerance;
  out.verdict = ok ? RigidityVerdict::rigid : RigidityVerdict::not_rigid;
  out.reason = ok ? "terminal field is affine with orthogonal gradient" : "terminal field is not a rigid motion";
  return out;
}

PiolaReport piola_rigidity_check(const VectorField& v, const std::vector<std::uint8_t>* mask) {
  const Grid& g = v.grid();
  const int d = g.dim();
  for (int a = 0; a < d; ++a) {
    if (g.cells(a) < 3) throw DomainError("finite-difference stencil exits the domain");
  }
  if (mask && mask->size() != g.size()) throw std::invalid_argument("mask size mismatch");
  PiolaReport rep;
  double vmax = 0.0;
  for (double x : v.data()) vmax = std::max(vmax, std::abs(x));
  double hmin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d; ++a) hmin = std::min(hmin, g.spacing(a));

  for (std::size_t i = 0; i < g.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    const MultiIndex idx = g.multi_index(i);
    bool interior = true;
    for (int a = 0; a < d; ++a) interior = interior && idx[a] >= 1 && idx[a] <= g.cells(a) - 2;
    if (!interior) continue;
    auto val = [&](std::array<int, kMaxDim> off) {
      MultiIndex j = idx;
      for (int a = 0; a < d; ++a) j[a] += off[a];
      return v.value(g.flat_index(j));
    };
    Matrix grad(d, d);
    for (int a = 0; a < d; ++a) {
      std::array<int, kMaxDim> p{0, 0, 0}, q{0, 0, 0};
      p[a] = 1;
      q[a] = -1;
      grad.col(a) = (val(p) - val(q)) / (2.0 * g.spacing(a));
    }
    rep.orthogonality_defect =
        std::max(rep.orthogonality_defect, (grad.transpose() * grad - Matrix::Identity(d, d)).norm());
    const Vector centre = v.value(i);
    Vector lap = Vector::Zero(d);
    double hess2 = 0.0;
    for (int a = 0; a < d; ++a) {
      for (int b = a; b < d; ++b) {
        Vector second;
        if (a == b) {
          std::array<int, kMaxDim> p{0, 0, 0}, q{0, 0, 0};
          p[a] = 1;
          q[a] = -1;
          second = (val(p) - 2.0 * centre + val(q)) / (g.spacing(a) * g.spacing(a));
          lap += second;
          hess2 += second.squaredNorm();
        } else {
          std::array<int, kMaxDim> pp{0, 0, 0}, pm{0, 0, 0}, mp{0, 0, 0}, mm{0, 0, 0};
          pp[a] = 1, pp[b] = 1;
          pm[a] = 1, pm[b] = -1;
          mp[a] = -1, mp[b] = 1;
          mm[a] = -1, mm[b] = -1;
          second = (val(pp) - val(pm) - val(mp) + val(mm)) / (4.0 * g.spacing(a) * g.spacing(b));
          hess2 += 2.0 * second.squaredNorm();
        }
      }
    }
    rep.laplacian = std::max(rep.laplacian, lap.norm());
    rep.hessian = std::max(rep.hessian, std::sqrt(hess2));
    ++rep.nodes_checked;
  }
  if (rep.nodes_checked == 0) throw DomainError("no interior nodes available for the finite-difference check");
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, vmax) / (hmin * hmin);
  rep.non_affine = rep.hessian > floor;
  return rep;
}

}  // namespace pdgamma
