#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdgamma/energy.hpp"
#include "pdgamma/grid.hpp"
#include "pdgamma/kernels.hpp"
#include "pdgamma/materials.hpp"

namespace pdgamma {

struct OptimizerSettings {
  int max_iters = 50000;
  // Infinity norm of the projected gradient per unit cell volume; <= 0
  // selects 1e-8 (d = 1) or 1e-6 (d >= 2).
  double grad_tol = 0.0;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  int memory = 10;  // L-BFGS pairs; 0 gives projected steepest descent
  int max_backtracks = 60;
};

// v = g on the collar {x : dist(x, Omega \ A) < r0} and off A; free elsewhere.
struct DirichletProblem {
  SubdomainMask A;
  VectorField g;
  RadialProfile rho;
  Potential phi;
  double m = 1.0;
  OptimizerSettings settings;
};

struct MinimizeResult {
  VectorField v;
  std::vector<double> energy_trace;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string start;  // label of the initial guess
};

// Checks r0 in (0, diam(A)/2) (when A has a complement), grid layouts and Phi'(0) = 0.
void validate_problem(const DirichletProblem& prob);

// Fixed-node flags: collar plus inactive nodes.
std::vector<std::uint8_t> fixed_nodes(const SubdomainMask& A);

// Projected L-BFGS with Armijo backtracking; iterates equal g on fixed nodes
// bit for bit.
MinimizeResult minimize_Fng(const DirichletProblem& prob, const VectorField& v0);

// Best of the starts g, g + sinusoidal bump, g + laminate perturbation.
MinimizeResult minimize_multistart(const DirichletProblem& prob, std::uint64_t seed, int starts = 3);

struct LinearizationRow {
  double eps = 0.0;
  double E_eps = 0.0;
  double E0 = 0.0;
  double abs_err = 0.0;
  bool excluded = false;
  std::string note;
};

struct LinearizationTable {
  std::vector<LinearizationRow> rows;
  std::vector<double> ratios;  // abs_err[i-1] / abs_err[i] over included rows
  double slope = 0.0;          // least-squares slope of log abs_err against log eps
  double lipschitz = 0.0;      // discrete Lipschitz constant of u
};

LinearizationTable linearization_experiment(const VectorField& u, const MicroPotential& w, double m,
                                            const LoadField* l, const std::vector<double>& eps);

// Largest |u_j - u_i| / |x_j - x_i| over axis neighbours.
double discrete_lipschitz(const VectorField& u);

// Central differences inside, one-sided at the boundary.
std::vector<Matrix> discrete_gradient(const VectorField& v);

struct LocalizationSettings {
  std::vector<int> n;
  std::function<Kernel(int)> kernel;  // rho_n
  std::function<int(int)> cells;      // cells per axis covering the unit box for step n
  double collar = 0.1;                // r0
  OptimizerSettings optimizer;
  int starts = 3;
  std::uint64_t seed = 0;
};

struct LocalizationStep {
  int n = 0;
  double delta = 0.0;
  double h = 0.0;
  double energy = 0.0;
  std::optional<double> lp_dist_prev;
  double lower_int = 0.0;
  double tilde_int = 0.0;
  double tolerance = 0.0;  // 10 (delta + h)
  bool bracketed = false;
  int iterations = 0;
  bool converged = false;
  std::string start;
};

struct LocalizationTrace {
  std::vector<LocalizationStep> steps;
  double lp_exponent = 0.0;  // m p
};

// For each n: A = (0,1)^d inside a grid with a two-cell outer band, collar
// r0, multistart minimisation, density-bound integrals of the discrete
// gradient over A, and L^{mp} distances after nearest-node injection onto the
// finest grid.
LocalizationTrace localization_experiment(const std::function<Vector(const Vector&)>& g, const Potential& phi,
                                          double m, const LocalizationSettings& settings);

}  // namespace pdgamma
