#include <cmath>

#include "doctest.h"
#include "pdgamma/kernels.hpp"
#include "pdgamma/materials.hpp"
#include "pdgamma/rng.hpp"

using namespace pdgamma;

TEST_CASE("strain measures") {
  CHECK(strain(1.0, 1.0) == 0.0);
  CHECK(strain(2.0, 1.0) == 0.0);
  CHECK(strain(1.0, 3.0) == doctest::Approx(2.0));
  CHECK(strain(2.0, 3.0) == doctest::Approx(4.0));
  CHECK(strain(3.0, 2.0) == doctest::Approx(7.0 / 3.0));
  CHECK(strain(2.0, 0.0) == doctest::Approx(-0.5));
  // Increment form agrees and stays accurate for tiny increments.
  for (double m : {1.0, 2.0, 2.5, 4.0}) {
    for (double t : {0.0, 0.3, 1.0, 1.7, 5.0}) {
      CHECK(strain_from_increment(m, t * t - 1.0) == doctest::Approx(strain(m, t)).epsilon(1e-13));
    }
    // s_m(sqrt(1 + x)) = x / 2 + O(x^2).
    CHECK(strain_from_increment(m, 1e-12) == doctest::Approx(0.5e-12).epsilon(1e-9));
  }
  CHECK_THROWS_AS(strain_from_increment(2.0, -1.5), DomainError);
}

TEST_CASE("strain expansion: linear part and eps -> 0 remainder") {
  Vector nu(2), zeta(2);
  nu << 0.6, 0.8;
  zeta << -0.3, 1.1;
  for (double m : {1.0, 2.0, 3.0}) {
    const StrainExpansion e0 = strain_taylor(m, nu, zeta, 0.0);
    const double limit = 0.5 * (zeta.squaredNorm() + (m - 2.0) * std::pow(nu.dot(zeta), 2));
    CHECK(e0.remainder == doctest::Approx(limit));
    for (double eps : {1e-2, 1e-3}) {
      const StrainExpansion e = strain_taylor(m, nu, zeta, eps);
      CHECK(e.linear == doctest::Approx(eps * nu.dot(zeta)));
      CHECK(e.remainder == doctest::Approx(limit).epsilon(20 * eps));
      const double s = strain(m, (nu + eps * zeta).norm());
      CHECK(e.linear + eps * eps * e.remainder == doctest::Approx(s).epsilon(1e-12));
    }
  }
}

TEST_CASE("power and capped potentials") {
  const Potential p2 = Potential::power(2.0);
  CHECK(p2(3.0) == 9.0);
  CHECK(p2.derivative(3.0) == doctest::Approx(6.0));
  CHECK(p2.differentiable_at_zero());
  const Potential p3 = Potential::power(3.0, 2.0);
  CHECK(p3(2.0) == doctest::Approx(16.0));
  const Potential cap = Potential::power_capped(4.0);
  CHECK(cap(0.5) == doctest::Approx(0.125));
  CHECK(cap(2.0) == doctest::Approx(15.0 / 4.0 + 0.5));
  CHECK(cap.derivative(1.0) == doctest::Approx(1.0));
  for (const Potential& phi : {p2, p3, cap}) {
    const GrowthReport g = phi.check_growth();
    CHECK(g.lower_ok);
    CHECK(g.upper_ok);
  }
  CHECK_THROWS_AS(Potential::power(0.5), std::invalid_argument);
}

TEST_CASE("tabulated potentials") {
  const Potential t = Potential::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 3.0}, 2.0);
  CHECK(t(0.5) == doctest::Approx(0.5));
  CHECK(t(1.5) == doctest::Approx(2.0));
  CHECK(t(4.0) == doctest::Approx(12.0));  // 3 (4/2)^2
  CHECK_FALSE(t.differentiable_at_zero());
  CHECK_THROWS_AS(Potential::tabulated({0.0, 1.0, 2.0}, {0.0, 2.0, 3.0}, 2.0), std::invalid_argument);  // concave
  CHECK_THROWS_AS(Potential::tabulated({0.1, 1.0}, {0.0, 1.0}, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(Potential::tabulated({0.0, 1.0}, {0.0, -1.0}, 2.0), std::invalid_argument);
}

TEST_CASE("catalog micro-potentials") {
  const RadialProfile k = make_rescaled(make_box(2), 0.5).profile();
  for (const auto& tag : catalog_tags()) {
    CAPTURE(tag);
    const MicroPotential w = catalog_potential(tag, {}, k);
    CHECK(w.psi(0.2, 0.0) == 0.0);
    const ConformanceReport c = w.conformance();
    CHECK(c.psi_zero_at_origin);
    CHECK(c.nonnegative);
    CHECK(c.twice_differentiable);
    CHECK(w(0.2, 0.1) == doctest::Approx(k.value(0.2) * w.psi(0.2, 0.1)));
  }
  CHECK_THROWS_AS(catalog_potential("no_such_tag", {}, k), std::invalid_argument);
  CHECK_THROWS_AS(catalog_potential("mbm", {{"s0", -1.0}}, k), std::invalid_argument);
}

TEST_CASE("closed-form curvatures at s = 0") {
  const RadialProfile k = make_box(1).profile();
  CHECK(catalog_potential("quadratic", {{"c", 3.0}}, k).second_derivative_at_zero(0.5) == doctest::Approx(6.0));
  CHECK(catalog_potential("mbm", {{"c", 2.0}}, k).second_derivative_at_zero(0.5) == doctest::Approx(2.0));
  CHECK(catalog_potential("quartic", {}, k).second_derivative_at_zero(0.5) == doctest::Approx(8.0));
  CHECK(catalog_potential("two_well", {}, k).second_derivative_at_zero(0.5) == doctest::Approx(2.0));
  const MicroPotential coh = catalog_potential("cohesive", {{"f_inf", 1.0}}, k);
  CHECK(coh.second_derivative_at_zero(0.5) == doctest::Approx(1.0));
  // Numerical second derivative agrees with the registered forms.
  for (const auto& tag : catalog_tags()) {
    const MicroPotential w = catalog_potential(tag, {}, k);
    const double h = 1e-4, r = 0.3;
    const double fd = (w.psi(r, h) - 2.0 * w.psi(r, 0.0) + w.psi(r, -h)) / (h * h);
    CAPTURE(tag);
    CHECK(w.second_derivative_at_zero(r) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("the MBM profile has zero force but positive energy near s = 0") {
  const MicroPotential w = catalog_potential("mbm", {{"s0", 0.1}, {"c", 2.0}}, make_box(1).profile());
  CHECK(w.psi(0.5, 0.05) == doctest::Approx(0.0025));
  CHECK(w.psi(0.5, 0.2) > 0.0);
  const ConformanceReport c = w.conformance();
  CHECK(c.force_zero_at_origin);
  CHECK(c.positive_away_from_zero);
}

TEST_CASE("the two-well profile is flagged for its second zero") {
  const MicroPotential w = catalog_potential("two_well", {{"s0", 0.5}}, make_box(1).profile());
  CHECK(w.psi(0.5, 0.5) == 0.0);
  const ConformanceReport c = w.conformance();
  CHECK_FALSE(c.positive_away_from_zero);
  CHECK_FALSE(c.notes.empty());
  for (const auto& tag : {"quadratic", "mbm", "modified_mbm", "cohesive", "quartic"}) {
    CAPTURE(tag);
    CHECK(catalog_potential(tag, {}, make_box(1).profile()).conformance().positive_away_from_zero);
  }
}

TEST_CASE("non-differentiable profiles are reported") {
  const RadialProfile k = make_box(1).profile();
  const MicroPotential kink(MicroTag::custom, "abs", k, [](double, double s) { return std::abs(s); }, 0.5);
  CHECK_THROWS_AS(kink.second_derivative_at_zero(0.5), DomainError);
  CHECK_THROWS_AS(derived_interaction_kernel(kink), DomainError);
}

TEST_CASE("derived interaction kernel") {
  const RadialProfile k = make_rescaled(make_box(1), 0.2).profile();
  const RadialProfile rho = derived_interaction_kernel(catalog_potential("quadratic", {{"c", 1.0}}, k));
  CHECK(rho.value(0.1) == doctest::Approx(2.0 * k.value(0.1)));
  CHECK(rho.support == doctest::Approx(0.2));
}

TEST_CASE("rescaled micro energy tends to the quadratic form") {
  const MicroPotential w = catalog_potential("quartic", {}, make_box(2).profile());
  Vector xi(2), zeta(2);
  xi << 0.3, 0.4;
  zeta << 1.0, -2.0;
  const Vector e = xi.normalized();
  const double limit = 0.5 * w.weight().value(0.5) * 8.0 * std::pow(e.dot(zeta), 2);
  CHECK(rescaled_micro_energy(w, 2.0, xi, zeta, 1e-4) == doctest::Approx(limit).epsilon(1e-3));
}

TEST_CASE("convex envelope in one dimension") {
  const auto phi = [](double t) { return std::pow(t * t - 1.0, 2); };
  const ConvexEnvelope env = convexify_1d(phi, -2.0, 2.0, 401);
  REQUIRE(env.t.size() == 401);
  for (std::size_t i = 0; i < env.t.size(); ++i) {
    const double t = env.t[i];
    const double expect = std::abs(t) <= 1.0 ? 0.0 : phi(t);
    CHECK(env.value[i] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(env.value[i] <= phi(t) + 1e-15);
  }
  // A convex input is returned unchanged.
  const ConvexEnvelope same = convexify_1d([](double t) { return t * t; }, -1.0, 1.0, 101);
  for (std::size_t i = 0; i < same.t.size(); ++i) CHECK(same.value[i] == doctest::Approx(same.t[i] * same.t[i]));
}
