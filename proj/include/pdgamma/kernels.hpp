#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pdgamma {

class MicroPotential;

enum class KernelFamily { box, annulus, tent, fractional, tabulated };

// Plain radial function r -> rho(r) with compact support, as consumed by the
// pair loops. Kernels convert to this; so does the interaction kernel derived
// from a micro-potential (which need not have unit mass).
struct RadialProfile {
  int dim = 1;
  double support = 0.0;
  std::function<double(double)> value;
  // Identifies the profile for the pair-stencil cache.
  std::string signature;
};

// Nonnegative radial kernel rho(|xi|) with unit mass on R^d, stored as
// rho(r) = C * delta^{-d} * g(r / delta) for a base profile g supported in
// the unit ball (or the table's last radius).
class Kernel {
 public:
  int dim() const;
  KernelFamily family() const;
  std::string family_name() const;
  double support_radius() const;
  // beta in rho ~ |xi|^{-beta} near 0 (0 when bounded).
  double singularity_exponent() const;
  double normalization() const { return normalization_; }
  double scale() const { return scale_; }

  double operator()(double r) const;

  // Integral of rho(xi) |xi|^power over the shell a < |xi| < b.
  double radial_integral(double a, double b, double power = 0.0) const;
  double mass() const;
  // Mass outside B(0, r).
  double tail_mass(double r) const;

  RadialProfile profile() const;
  std::string signature() const;

  struct Shape;

 private:
  Kernel(std::shared_ptr<const Shape> shape, double normalization, double scale);
  static Kernel normalised(std::shared_ptr<const Shape> shape);
  double base_integral(double a, double b, double exponent) const;

  std::shared_ptr<const Shape> shape_;
  double normalization_ = 1.0;
  double scale_ = 1.0;

  friend Kernel make_box(int);
  friend Kernel make_annulus(int, double);
  friend Kernel make_tent(int);
  friend Kernel make_fractional(int, double, double);
  friend Kernel make_tabulated(int, std::vector<double>, std::vector<double>);
  friend Kernel make_rescaled(const Kernel&, double);
};

// Constant on the unit ball.
Kernel make_box(int dim);
// Constant on inner <= |xi| <= 1; vanishes near the origin.
Kernel make_annulus(int dim, double inner);
// Proportional to (1 - |xi|) on the unit ball.
Kernel make_tent(int dim);
// C (1 - s) |xi|^{-(d + s p - p)} on the unit ball.
Kernel make_fractional(int dim, double s, double p);
// Piecewise-linear radial profile through (r_k, rho_k), renormalised to unit mass.
Kernel make_tabulated(int dim, std::vector<double> r, std::vector<double> rho);
// rho_delta(|xi|) = delta^{-d} rho(|xi| / delta).
Kernel make_rescaled(const Kernel& base, double delta);

struct KernelSequence {
  std::function<Kernel(int)> generator;
  std::string law;  // e.g. "box, delta(n) = 1/n"
};

struct AssumptionAReport {
  std::vector<double> tails;  // tails[n-1] = mass of rho_n outside B(0, delta')
  int monotone_from = 1;      // tails non-increasing for n >= monotone_from
  bool pass = false;
};

// Tail masses along the sequence; passes when the last tail is < 1e-3 and the
// tails are non-increasing over at least the second half of the sweep.
AssumptionAReport check_assumption_A(const KernelSequence& seq, double delta_prime, int n_max);

struct DensityConditionReport {
  std::vector<double> deltas;
  std::vector<double> integrals;  // I(delta) = int_{|z|>delta} rho(z) / |z|^p dz
  bool diverges = false;
};

// Evaluates I(delta) at delta_j = R 2^{-j}, j = 1..12 (R = support radius);
// reports divergence when the increments of I stop decaying geometrically.
DensityConditionReport check_density_condition(const Kernel& k, double p);

// rho(xi) = k(xi) d^2Psi/ds^2(xi, 0), by closed form when the micro-potential
// registers one, otherwise by Richardson-extrapolated central differences.
// Throws DomainError when Psi is not twice differentiable at s = 0.
RadialProfile derived_interaction_kernel(const MicroPotential& w);

}  // namespace pdgamma
