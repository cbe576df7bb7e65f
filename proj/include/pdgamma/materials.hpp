#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdgamma/kernels.hpp"
#include "pdgamma/types.hpp"

namespace pdgamma {

// s_m(t) = (t^m - 1) / m for t = |Dv| >= 0.
double strain(double m, double t);

// s_m evaluated at t = sqrt(1 + x), i.e. from the increment x = t^2 - 1.
// Stable for small x.
double strain_from_increment(double m, double x);

struct StrainExpansion {
  double linear = 0.0;     // eps nu.zeta
  double remainder = 0.0;  // psi with s~_m(nu, eps zeta) = linear + eps^2 psi
};

// s~_m(nu, eps zeta) = s_m(|nu + eps zeta|) split into its linear part and
// the eps^2 remainder. At eps = 0 the remainder is the limit
// (|zeta|^2 + (m - 2)(nu.zeta)^2) / 2.
StrainExpansion strain_taylor(double m, const Vector& nu, const Vector& zeta, double eps);

struct GrowthReport {
  double C0 = 0.0, C1 = 0.0, p = 0.0;
  bool lower_ok = false, upper_ok = false;
  double worst_lower = 0.0, worst_upper = 0.0;  // min slack of each inequality
};

// Convex, nondecreasing profile Phi on [0, inf) with Phi(0) = 0 and
// C0 (a^p - 1) <= Phi(a) <= C1 (1 + a^p).
class Potential {
 public:
  // scale * a^p.
  static Potential power(double p, double scale = 1.0);
  // a^2 / 2 on [0, 1], (a^p - 1) / p + 1/2 beyond: quadratic at the origin
  // with p-growth at infinity.
  static Potential power_capped(double p);
  // Piecewise linear through (a_k, Phi_k) starting at (0, 0), continued as
  // Phi_N (a / a_N)^p. Rejects data that is not nondecreasing and convex.
  static Potential tabulated(std::vector<double> a, std::vector<double> phi, double p);

  double operator()(double a) const;
  // Right derivative; 0 at a = 0 when differentiable there.
  double derivative(double a) const;

  double p() const { return p_; }
  double C0() const { return C0_; }
  double C1() const { return C1_; }
  // False when Phi'(0+) > 0; such profiles are fine for energies but not
  // for the gradient-based solver.
  bool differentiable_at_zero() const { return smooth_at_zero_; }
  const std::string& name() const { return name_; }
  std::string signature() const;

  // Samples both growth inequalities on a log grid a in [1e-3, 1e3].
  GrowthReport check_growth() const;

 private:
  enum class Kind { power, power_capped, tabulated };
  Kind kind_ = Kind::power;
  double p_ = 2.0, scale_ = 1.0, C0_ = 1.0, C1_ = 1.0;
  bool smooth_at_zero_ = true;
  std::string name_;
  std::vector<double> a_, phi_;
};

enum class MicroTag { quadratic, mbm, modified_mbm, cohesive, quartic, two_well, custom };

struct ConformanceReport {
  bool psi_zero_at_origin = false;    // Psi(xi, 0) = 0
  bool force_zero_at_origin = false;  // dPsi/ds(xi, 0) = 0
  bool nonnegative = false;
  bool positive_away_from_zero = false;  // condition ii)
  bool lower_quadratic = false;          // condition iii) with c1 > 0
  bool bounded_curvature = false;        // condition iv) with c2 < inf
  bool twice_differentiable = false;
  double c1 = 0.0, c2 = 0.0, delta0 = 0.0;
  std::vector<std::string> notes;

  bool all_conditions() const {
    return psi_zero_at_origin && force_zero_at_origin && nonnegative && positive_away_from_zero &&
           lower_quadratic && bounded_curvature && twice_differentiable;
  }
};

// Bond micro-potential w(xi, s) = k(|xi|) Psi(|xi|, s).
class MicroPotential {
 public:
  using Profile = std::function<double(double r, double s)>;

  MicroPotential(MicroTag tag, std::string name, RadialProfile weight, Profile psi, double delta0,
                 std::function<double(double)> psi_ss0 = {});

  MicroTag tag() const { return tag_; }
  const std::string& name() const { return name_; }
  const RadialProfile& weight() const { return weight_; }
  double delta0() const { return delta0_; }

  double psi(double r, double s) const { return psi_(r, s); }
  double operator()(double r, double s) const { return weight_.value(r) * psi_(r, s); }

  // d^2 Psi / ds^2 (r, 0): closed form if registered, else Richardson
  // central differences with step 1e-5. Throws DomainError when the
  // one-sided second differences disagree.
  double second_derivative_at_zero(double r) const;
  bool has_closed_form_curvature() const { return static_cast<bool>(psi_ss0_); }

  // Sampled check of Psi(0) = 0, Psi'(0) = 0, Psi >= 0 and conditions
  // ii)-iv) over radii in (0, support] and strains in (-1, 10].
  ConformanceReport conformance() const;

  std::string signature() const;

 private:
  MicroTag tag_;
  std::string name_;
  RadialProfile weight_;
  Profile psi_;
  double delta0_;
  std::function<double(double)> psi_ss0_;
};

using CatalogParams = std::map<std::string, double>;

// Tags: quadratic(c), mbm(s0, c), modified_mbm(s0, s1, c), cohesive(f_inf),
// quartic, two_well(s0). Unknown tags and out-of-range parameters throw
// std::invalid_argument. Missing parameters take the documented defaults.
MicroPotential catalog_potential(const std::string& tag, const CatalogParams& params, RadialProfile weight);
std::vector<std::string> catalog_tags();

// eps^{-2} w(xi, s~_m(xi/|xi|, eps zeta)).
double rescaled_micro_energy(const MicroPotential& w, double m, const Vector& xi, const Vector& zeta, double eps);

struct ConvexEnvelope {
  std::vector<double> t;
  std::vector<double> value;
};

// Lower convex envelope of phi sampled on n equispaced points of
// [t_min, t_max] (discrete biconjugate, via the lower convex hull).
ConvexEnvelope convexify_1d(const std::function<double(double)>& phi, double t_min, double t_max, int n);

}  // namespace pdgamma
