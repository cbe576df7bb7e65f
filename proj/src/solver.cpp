#include "pdgamma/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "pdgamma/constructions.hpp"
#include "pdgamma/density.hpp"
#include "pdgamma/parallel.hpp"
#include "pdgamma/quadrature.hpp"
#include "pdgamma/rng.hpp"

namespace pdgamma {

std::vector<std::uint8_t> fixed_nodes(const SubdomainMask& A) {
  std::vector<std::uint8_t> fixed = A.collar();
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (!A.active(i)) fixed[i] = 1;
  }
  return fixed;
}

void validate_problem(const DirichletProblem& prob) {
  if (!prob.g.grid().same_layout(prob.A.grid())) throw std::invalid_argument("datum g and subdomain grids differ");
  if (!prob.g.all_finite()) throw DomainError("datum g has non-finite values");
  if (!(prob.m >= 1.0)) throw std::invalid_argument("strain order m must be >= 1");
  if (!prob.phi.differentiable_at_zero()) {
    throw DomainError("the solver needs Phi'(0+) = 0; this potential is for energy evaluation only");
  }
  if (!prob.A.is_full()) {
    const double r0 = prob.A.collar_width();
    const double diam = prob.A.active_diameter();
    if (!(r0 > 0.0 && r0 < 0.5 * diam)) throw std::invalid_argument("collar width r0 must lie in (0, diam(A)/2)");
  }
  if (prob.settings.max_iters < 0 || prob.settings.memory < 0 || !(prob.settings.shrink > 0.0 && prob.settings.shrink < 1.0) ||
      !(prob.settings.armijo_c > 0.0 && prob.settings.armijo_c < 1.0)) {
    throw std::invalid_argument("invalid optimizer settings");
  }
}

namespace {

double dot_free(const std::vector<double>& a, const std::vector<double>& b, const std::vector<std::uint8_t>& free_dof) {
  std::vector<double> t(a.size(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) t[k] = free_dof[k] ? a[k] * b[k] : 0.0;
  return pairwise_sum(t);
}

double inf_norm_free(const std::vector<double>& a, const std::vector<std::uint8_t>& free_dof) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (free_dof[k]) m = std::max(m, std::abs(a[k]));
  }
  return m;
}

}  // namespace

MinimizeResult minimize_Fng(const DirichletProblem& prob, const VectorField& v0) {
  validate_problem(prob);
  if (!v0.grid().same_layout(prob.A.grid())) throw std::invalid_argument("initial guess grid differs");
  const Grid& grid = prob.A.grid();
  const int d = grid.dim();
  const std::vector<std::uint8_t> fixed = fixed_nodes(prob.A);
  std::vector<std::uint8_t> free_dof(grid.size() * d, 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int k = 0; k < d; ++k) free_dof[i * d + k] = fixed[i] ? 0 : 1;
  }
  const double tol = prob.settings.grad_tol > 0.0 ? prob.settings.grad_tol : (d == 1 ? 1e-8 : 1e-6);
  const double vol = grid.cell_volume();

  // Projection: fixed nodes take g exactly.
  VectorField v = v0;
  for (std::size_t k = 0; k < free_dof.size(); ++k) {
    if (!free_dof[k]) v.data()[k] = prob.g.data()[k];
  }
  auto energy = [&](const VectorField& x) { return energy_Fn(x, prob.A, prob.rho, prob.phi, prob.m).value; };
  auto gradient = [&](const VectorField& x) {
    std::vector<double> gr = gradient_Fn(x, prob.A, prob.rho, prob.phi, prob.m).data();
    for (std::size_t k = 0; k < gr.size(); ++k) {
      if (!free_dof[k]) gr[k] = 0.0;
    }
    return gr;
  };

  MinimizeResult res{v, {}, 0.0, 0, false, ""};
  double E = energy(v);
  if (!std::isfinite(E)) throw NumericalError("initial energy is not finite");
  std::vector<double> gr = gradient(v);
  res.energy_trace.push_back(E);
  res.grad_norm = inf_norm_free(gr, free_dof) / vol;
  if (res.grad_norm <= tol) {
    res.v = v;
    res.converged = true;
    return res;
  }

  std::deque<std::pair<std::vector<double>, std::vector<double>>> memory;  // (s, y)
  const std::size_t n = free_dof.size();
  const double h = grid.mean_spacing();
  int stagnant = 0;
  for (int it = 0; it < prob.settings.max_iters; ++it) {
    // Two-loop recursion on the free components.
    std::vector<double> q = gr;
    std::vector<double> alpha(memory.size());
    for (std::size_t j = memory.size(); j-- > 0;) {
      const auto& [s, y] = memory[j];
      alpha[j] = dot_free(s, q, free_dof) / dot_free(y, s, free_dof);
      for (std::size_t k = 0; k < n; ++k) q[k] -= alpha[j] * y[k];
    }
    bool quasi_newton = !memory.empty();
    if (quasi_newton) {
      const auto& [s, y] = memory.back();
      const double gamma = dot_free(s, y, free_dof) / dot_free(y, y, free_dof);
      for (double& x : q) x *= gamma;
      for (std::size_t j = 0; j < memory.size(); ++j) {
        const auto& [s2, y2] = memory[j];
        const double beta = dot_free(y2, q, free_dof) / dot_free(y2, s2, free_dof);
        for (std::size_t k = 0; k < n; ++k) q[k] += (alpha[j] - beta) * s2[k];
      }
    }
    std::vector<double> dir(n);
    for (std::size_t k = 0; k < n; ++k) dir[k] = free_dof[k] ? -q[k] : 0.0;
    double slope = dot_free(gr, dir, free_dof);
    if (!(slope < 0.0)) {
      memory.clear();
      quasi_newton = false;
      for (std::size_t k = 0; k < n; ++k) dir[k] = free_dof[k] ? -gr[k] : 0.0;
      slope = dot_free(gr, dir, free_dof);
    }
    double step = 1.0;
    if (!quasi_newton) {
      // Steepest descent: first trial moves the largest node by 0.1 h.
      const double dmax = inf_norm_free(dir, free_dof);
      step = dmax > 0.0 ? 0.1 * h / dmax : 1.0;
    }

    bool accepted = false;
    VectorField trial = v;
    double E_trial = E;
    for (int bt = 0; bt <= prob.settings.max_backtracks; ++bt) {
      for (std::size_t k = 0; k < n; ++k) trial.data()[k] = v.data()[k] + (free_dof[k] ? step * dir[k] : 0.0);
      try {
        E_trial = energy(trial);
      } catch (const DomainError&) {
        E_trial = std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(E_trial) && E_trial <= E + prob.settings.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= prob.settings.shrink;
    }
    if (!accepted) {
      if (quasi_newton) {
        memory.clear();
        continue;
      }
      break;  // no descent available at working precision
    }
    std::vector<double> g_new = gradient(trial);
    std::vector<double> s(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = trial.data()[k] - v.data()[k];
      y[k] = g_new[k] - gr[k];
    }
    const double sy = dot_free(s, y, free_dof);
    if (prob.settings.memory > 0 && sy > 1e-300) {
      memory.emplace_back(std::move(s), std::move(y));
      if (memory.size() > static_cast<std::size_t>(prob.settings.memory)) memory.pop_front();
    }
    stagnant = (E - E_trial <= 1e-15 * std::abs(E)) ? stagnant + 1 : 0;
    v = std::move(trial);
    E = E_trial;
    gr = std::move(g_new);
    res.energy_trace.push_back(E);
    res.iterations = it + 1;
    res.grad_norm = inf_norm_free(gr, free_dof) / vol;
    if (res.grad_norm <= tol) {
      res.converged = true;
      break;
    }
    if (stagnant >= 20) break;
  }
  res.v = std::move(v);
  return res;
}

MinimizeResult minimize_multistart(const DirichletProblem& prob, std::uint64_t seed, int starts) {
  validate_problem(prob);
  if (starts < 1) throw std::invalid_argument("multistart needs at least one start");
  const Grid& grid = prob.A.grid();
  const int d = grid.dim();
  const std::vector<std::uint8_t> fixed = fixed_nodes(prob.A);

  // Bounding box of the free nodes, for perturbations vanishing at its edge.
  Vector lo = Vector::Constant(d, std::numeric_limits<double>::infinity());
  Vector hi = Vector::Constant(d, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (fixed[i]) continue;
    const Vector x = grid.node(i);
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const bool any_free = (hi - lo).minCoeff() >= 0.0;
  auto bump = [&](const Vector& x) {
    double b = 1.0;
    for (int a = 0; a < d; ++a) {
      const double w = hi[a] - lo[a] + grid.spacing(a);
      b *= std::sin(std::numbers::pi * (x[a] - lo[a] + 0.5 * grid.spacing(a)) / w);
    }
    return std::max(b, 0.0);
  };

  std::vector<std::pair<std::string, VectorField>> initial;
  initial.emplace_back("g", prob.g);
  if (starts >= 2 && any_free) {
    CounterRng rng(seed, 1);
    const double amp = 0.25 * prob.rho.support;
    VectorField v = prob.g;
    std::vector<double> phase(d);
    for (int a = 0; a < d; ++a) phase[a] = 2.0 * std::numbers::pi * rng.uniform();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (fixed[i]) continue;
      const Vector x = grid.node(i);
      for (int a = 0; a < d; ++a) v.at(i)[a] += amp * bump(x) * std::sin(3.0 * std::numbers::pi * x[a] + phase[a]);
    }
    initial.emplace_back("sinusoidal", std::move(v));
  }
  if (starts >= 3 && any_free) {
    // Laminate oscillation matching the mean diagonal stretch of g.
    const std::vector<Matrix> grad = discrete_gradient(prob.g);
    Vector lambda = Vector::Zero(d);
    std::size_t count = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (fixed[i]) continue;
      lambda += grad[i].diagonal();
      ++count;
    }
    lambda /= static_cast<double>(std::max<std::size_t>(count, 1));
    const double k = std::max(1.0, std::floor(0.25 / std::max(prob.rho.support, 1e-12)));
    VectorField v = prob.g;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (fixed[i]) continue;
      const Vector x = grid.node(i);
      for (int a = 0; a < d; ++a) {
        const double l = std::clamp(std::abs(lambda[a]), 0.0, 1.0);
        v.at(i)[a] += bump(x) * laminate_gamma(l, k * (x[a] - lo[a])) / k;
      }
    }
    initial.emplace_back("laminate", std::move(v));
  }
  for (int extra = 3; extra < starts && any_free; ++extra) {
    CounterRng rng(seed, 100 + static_cast<std::uint64_t>(extra));
    VectorField v = prob.g;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (fixed[i]) continue;
      for (int a = 0; a < d; ++a) v.at(i)[a] += 0.1 * prob.rho.support * bump(grid.node(i)) * rng.normal();
    }
    initial.emplace_back("random" + std::to_string(extra), std::move(v));
  }

  std::optional<MinimizeResult> best;
  for (auto& [label, v0] : initial) {
    MinimizeResult r = minimize_Fng(prob, v0);
    r.start = label;
    if (!best || r.energy_trace.back() < best->energy_trace.back()) best = std::move(r);
  }
  return std::move(*best);
}

double discrete_lipschitz(const VectorField& u) {
  const Grid& g = u.grid();
  double lip = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const MultiIndex idx = g.multi_index(i);
    for (int a = 0; a < g.dim(); ++a) {
      if (idx[a] + 1 >= g.cells(a)) continue;
      const std::size_t j = i + g.stride(a);
      lip = std::max(lip, (u.value(j) - u.value(i)).norm() / g.spacing(a));
    }
  }
  return lip;
}

std::vector<Matrix> discrete_gradient(const VectorField& v) {
  const Grid& g = v.grid();
  const int d = g.dim();
  std::vector<Matrix> out(g.size(), Matrix::Zero(d, d));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const MultiIndex idx = g.multi_index(i);
    for (int a = 0; a < d; ++a) {
      const bool has_lo = idx[a] > 0, has_hi = idx[a] + 1 < g.cells(a);
      const std::size_t lo = has_lo ? i - g.stride(a) : i;
      const std::size_t hi = has_hi ? i + g.stride(a) : i;
      const double span = (has_lo && has_hi ? 2.0 : 1.0) * g.spacing(a);
      out[i].col(a) = (v.value(hi) - v.value(lo)) / span;
    }
  }
  return out;
}

LinearizationTable linearization_experiment(const VectorField& u, const MicroPotential& w, double m,
                                            const LoadField* l, const std::vector<double>& eps) {
  if (eps.empty()) throw std::invalid_argument("linearization needs at least one eps");
  for (std::size_t k = 1; k < eps.size(); ++k) {
    if (!(eps[k] < eps[k - 1])) throw std::invalid_argument("eps list must be decreasing");
  }
  LinearizationTable table;
  table.lipschitz = discrete_lipschitz(u);
  const RadialProfile rho = derived_interaction_kernel(w);
  const double E0 = energy_E0(u, rho, l).value;
  for (double e : eps) {
    LinearizationRow row;
    row.eps = e;
    row.E0 = E0;
    try {
      row.E_eps = energy_E_eps(u, w, m, e, l).value;
      row.abs_err = std::abs(row.E_eps - E0);
    } catch (const DomainError& ex) {
      row.excluded = true;
      row.note = ex.what();
      row.E_eps = std::numeric_limits<double>::quiet_NaN();
      row.abs_err = std::numeric_limits<double>::quiet_NaN();
    }
    table.rows.push_back(row);
  }
  std::vector<double> lx, ly;
  const LinearizationRow* prev = nullptr;
  for (const auto& row : table.rows) {
    if (row.excluded) continue;
    if (prev && row.abs_err > 0.0) table.ratios.push_back(prev->abs_err / row.abs_err);
    prev = &row;
    if (row.abs_err > 0.0) {
      lx.push_back(std::log(row.eps));
      ly.push_back(std::log(row.abs_err));
    }
  }
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
      sxy += (lx[k] - mx) * (ly[k] - my);
      sxx += (lx[k] - mx) * (lx[k] - mx);
    }
    table.slope = sxy / sxx;
  } else {
    table.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return table;
}

LocalizationTrace localization_experiment(const std::function<Vector(const Vector&)>& g, const Potential& phi,
                                          double m, const LocalizationSettings& settings) {
  if (settings.n.empty()) throw std::invalid_argument("localization needs at least one n");
  if (!settings.kernel || !settings.cells) throw std::invalid_argument("localization needs kernel and grid laws");
  LocalizationTrace trace;
  trace.lp_exponent = m * phi.p();
  std::vector<VectorField> minimisers;
  for (int n : settings.n) {
    const Kernel k = settings.kernel(n);
    const int d = k.dim();
    const int inner = settings.cells(n);
    if (inner < 2) throw std::invalid_argument("localization grid needs >= 2 cells");
    const double h = 1.0 / inner;
    const GridPtr grid = make_grid(d, std::vector<double>(d, -2.0 * h), std::vector<double>(d, 1.0 + 4.0 * h),
                                   std::vector<int>(d, inner + 4));
    const SubdomainMask A = SubdomainMask::box(grid, Vector::Zero(d), Vector::Ones(d), settings.collar);
    DirichletProblem prob{A, VectorField::sample(grid, g), k.profile(), phi, m, settings.optimizer};
    MinimizeResult r = minimize_multistart(prob, settings.seed + static_cast<std::uint64_t>(n), settings.starts);

    LocalizationStep step;
    step.n = n;
    step.delta = k.support_radius();
    step.h = h;
    step.energy = r.energy_trace.back();
    step.iterations = r.iterations;
    step.converged = r.converged;
    step.start = r.start;
    const std::vector<Matrix> grad = discrete_gradient(r.v);
    const SphereQuadrature q = sphere_quadrature(d, d == 1 ? 2 : (d == 2 ? 256 : 32));
    std::vector<double> lo_terms, ti_terms;
    for (std::size_t i = 0; i < grid->size(); ++i) {
      if (!A.active(i)) continue;
      lo_terms.push_back(density_lower(grad[i], phi, m, q));
      ti_terms.push_back(density_tilde(grad[i], phi, m, q));
    }
    step.lower_int = pairwise_sum(lo_terms) * grid->cell_volume();
    step.tilde_int = pairwise_sum(ti_terms) * grid->cell_volume();
    step.tolerance = 10.0 * (step.delta + h);
    step.bracketed = step.energy >= step.lower_int - step.tolerance && step.energy <= step.tilde_int + step.tolerance;
    trace.steps.push_back(step);
    minimisers.push_back(std::move(r.v));
  }

  // L^{mp} distances on the finest grid by nearest-node injection.
  std::size_t finest = 0;
  for (std::size_t s = 1; s < minimisers.size(); ++s) {
    if (minimisers[s].size() > minimisers[finest].size()) finest = s;
  }
  const Grid& fg = minimisers[finest].grid();
  const double P = trace.lp_exponent;
  auto inject = [&](const VectorField& f, std::size_t i) { return f.value(f.grid().nearest_node(fg.node(i))); };
  for (std::size_t s = 1; s < minimisers.size(); ++s) {
    std::vector<double> terms;
    for (std::size_t i = 0; i < fg.size(); ++i) {
      const Vector x = fg.node(i);
      if ((x.array() <= 0.0).any() || (x.array() >= 1.0).any()) continue;
      terms.push_back(std::pow((inject(minimisers[s], i) - inject(minimisers[s - 1], i)).norm(), P));
    }
    trace.steps[s].lp_dist_prev = std::pow(pairwise_sum(terms) * fg.cell_volume(), 1.0 / P);
  }
  return trace;
}

}  // namespace pdgamma
