#pragma once

#include <string>

#include "pdgamma/materials.hpp"
#include "pdgamma/quadrature.hpp"
#include "pdgamma/types.hpp"

namespace pdgamma {

// Singular values in descending order (Jacobi SVD).
Vector singular_values(const Matrix& F);

// All densities below are evaluated on diag(singular values of F): the
// integrands depend on F only through |F omega|, hence through F^T F.

// mean over the sphere of Phi(m^{-1} (|F w|^m - 1)_+).
double density_lower(const Matrix& F, const Potential& phi, double m, const SphereQuadrature& q);

// mean over the sphere of Phi(|m^{-1} (|F w|^m - 1)|).
double density_tilde(const Matrix& F, const Potential& phi, double m, const SphereQuadrature& q);

struct LaminateSearch {
  int normal_angles = 33;     // n on the quarter circle, endpoints included
  int amplitude_angles = 64;  // direction of a on the full circle
  int amplitudes = 32;        // |a| in (0, max_amplitude]
  int fractions = 32;         // lambda in (0, 1)
  double max_amplitude = 4.0;
  int coarse_order = 64;  // sphere order used by the coarse scan
  int refine_starts = 8;
  int refine_iters = 400;
};

struct LaminateResult {
  double value = 0.0;   // min(tilde, best laminate)
  double tilde = 0.0;
  double lambda = 0.0;  // volume fraction of the best laminate
  Vector a, n;          // rank-one direction a (x) n, in the singular-value frame
  bool improved = false;
};

// One-level laminate bound
//   min over a, n, lambda of lambda T(F + (1-lambda) a(x)n) + (1-lambda) T(F - lambda a(x)n),
// T = density_tilde, never above T(F). d = 2 only.
LaminateResult density_laminate_upper(const Matrix& F, const Potential& phi, double m, const SphereQuadrature& q,
                                      const LaminateSearch& search = {});

// sigma_max(F) <= 1 + 1e-12.
bool zero_set_predicate(const Matrix& F);

// Largest C with lower(F) >= C (|F|^p - 1) over a sweep of singular values
// with |F| in [2, 50] (m = 1), reduced by 1% for off-grid matrices.
double fit_coercivity_constant(int dim, const Potential& phi, const SphereQuadrature& q);

struct CoercivityCheck {
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
};
CoercivityCheck coercivity_check(const Matrix& F, const Potential& phi, double C, const SphereQuadrature& q);

// Max over {lower, tilde, laminate (d = 2)} of |density(UF) - density(F)|.
// Throws std::invalid_argument when U is not orthogonal to 1e-12.
double frame_indifference_check(const Matrix& F, const Matrix& U, const Potential& phi, double m,
                                const SphereQuadrature& q, const LaminateSearch& search = {});

// Phi(m^{-1} (|t|^m - 1)_+): the one-dimensional limit density.
double one_d_exact_density(double t, const Potential& phi, double m);

struct DensityBounds {
  Matrix F;
  Vector sigma;
  double lower = 0.0, tilde = 0.0, laminate_upper = 0.0;
  double p = 0.0, m = 1.0;
  int order = 0;
  bool zero_set = false;
};

// Laminate bound only for d = 2; elsewhere it equals tilde.
DensityBounds density_bounds(const Matrix& F, const Potential& phi, double m, int order,
                             const LaminateSearch& search = {});

}  // namespace pdgamma
