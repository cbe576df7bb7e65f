#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdgamma/grid.hpp"
#include "pdgamma/kernels.hpp"
#include "pdgamma/materials.hpp"

namespace pdgamma {

struct EnergyReport {
  double value = 0.0;
  std::uint64_t pair_count = 0;        // ordered pairs (i, j), i != j, inside the support
  std::uint64_t skipped_diagonal = 0;  // excluded pairs i = j
  double h = 0.0;
  std::optional<double> est_error;

  // {"value", "pair_count", "skipped_diagonal", "h", "est_error"}
  std::string to_json() const;
};

// Body force density per node.
using LoadField = VectorField;

// Sets fine.est_error = |fine - coarse| / (2^order - 1) for a grid halving.
void richardson_estimate(const EnergyReport& coarse, EnergyReport& fine, double order = 1.0);

// F_n(v, A) = sum over active i != j of rho(x_j - x_i) Phi(|s_m[v]|) h^{2d}.
EnergyReport energy_Fn(const VectorField& v, const SubdomainMask& A, const RadialProfile& rho, const Potential& phi,
                       double m);

// As energy_Fn, but x ranges over `outer` and y over `inner` (one flag per
// node). Used where the inner integral extends past the outer domain.
EnergyReport energy_Fn_cross(const VectorField& v, const std::vector<std::uint8_t>& outer,
                             const std::vector<std::uint8_t>& inner, const RadialProfile& rho, const Potential& phi,
                             double m);

// eps^{-2} sum w(x_j - x_i, s_m[i + eps u]) h^{2d} - sum l.u h^d over all of Omega.
// The micro-potential's weight provides the kernel support.
EnergyReport energy_E_eps(const VectorField& u, const MicroPotential& w, double m, double eps, const LoadField* l);

// 1/2 sum rho (Du . e)^2 h^{2d} - sum l.u h^d, with e the unit bond.
EnergyReport energy_E0(const VectorField& u, const RadialProfile& rho, const LoadField* l);

// [v]^p = sum rho |v_j - v_i|^p / |x_j - x_i|^p h^{2d} over A x A (p-th power).
double seminorm_W(const VectorField& v, const RadialProfile& rho, double p, const SubdomainMask& A);

// [u]_{X_rho} = sum rho (Du . e)^2 h^{2d}.
double seminorm_Xrho(const VectorField& u, const RadialProfile& rho);

// Gradient of the discrete F_n with respect to the nodal values; zero at
// inactive nodes. Requires Phi'(0+) = 0.
VectorField gradient_Fn(const VectorField& v, const SubdomainMask& A, const RadialProfile& rho, const Potential& phi,
                        double m);

// Constant C with [v]^p <= C (F_n(v, A) + |A|) for unit-mass kernels:
// 2^{p-1} max(1 + m^p, m^p / C0).
double coercivity_constant(const Potential& phi, double m);

}  // namespace pdgamma
