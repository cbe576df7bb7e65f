#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pdgamma/kernels.hpp"

using namespace pdgamma;

namespace {

std::vector<Kernel> catalog(int d) {
  return {make_box(d), make_annulus(d, 0.5), make_tent(d), make_fractional(d, 0.5, 2.0), make_fractional(d, 0.25, 3.0),
          make_tabulated(d, {0.0, 0.5, 1.0}, {2.0, 1.0, 0.0})};
}

}  // namespace

TEST_CASE("catalog kernels have unit mass at every scale") {
  for (int d = 1; d <= 3; ++d) {
    for (const Kernel& k : catalog(d)) {
      CAPTURE(k.family_name());
      CAPTURE(d);
      CHECK(k.mass() == doctest::Approx(1.0).epsilon(1e-10));
      for (double delta : {0.3, 0.01}) CHECK(make_rescaled(k, delta).mass() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("box kernel closed forms") {
  // 1D: 1/2 on (-1, 1). 2D: 1/pi on the unit disc. 3D: 3/(4 pi).
  CHECK(make_box(1)(0.3) == doctest::Approx(0.5));
  CHECK(make_box(2)(0.3) == doctest::Approx(1.0 / std::numbers::pi));
  CHECK(make_box(3)(0.3) == doctest::Approx(3.0 / (4.0 * std::numbers::pi)));
  CHECK(make_box(1)(1.5) == 0.0);
  const Kernel k = make_rescaled(make_box(1), 0.1);
  CHECK(k(0.05) == doctest::Approx(5.0));
  CHECK(k.support_radius() == doctest::Approx(0.1));
  CHECK(k.tail_mass(0.05) == doctest::Approx(0.5));
}

TEST_CASE("annulus vanishes near the origin; tent is linear") {
  const Kernel a = make_annulus(2, 0.5);
  CHECK(a(0.25) == 0.0);
  CHECK(a(0.75) > 0.0);
  // 2D annulus: constant c with c pi (1 - 1/4) = 1.
  CHECK(a(0.75) == doctest::Approx(1.0 / (0.75 * std::numbers::pi)));
  const Kernel t = make_tent(1);
  // 1D tent: c (1 - r) on (-1, 1) with mass c = 1.
  CHECK(t(0.25) == doctest::Approx(0.75));
}

TEST_CASE("fractional kernel singularity and normalization") {
  const Kernel k = make_fractional(1, 0.5, 2.0);
  CHECK(k.singularity_exponent() == doctest::Approx(1.0 + 1.0 - 2.0));
  const Kernel k3 = make_fractional(3, 0.75, 2.0);
  CHECK(k3.singularity_exponent() == doctest::Approx(3.0 + 1.5 - 2.0));
  // 3D, beta = 2.5: rho = C r^{-2.5}, mass 4 pi C / 0.5 = 1.
  CHECK(k3(0.5) == doctest::Approx(std::pow(0.5, -2.5) / (8.0 * std::numbers::pi)).epsilon(1e-8));
  CHECK_THROWS_AS(make_fractional(2, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(make_fractional(2, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("tabulated kernels validate their table") {
  CHECK_THROWS_AS(make_tabulated(1, {0.0, 1.0}, {1.0, -1.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_tabulated(1, {0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_tabulated(1, {0.0}, {1.0}), std::invalid_argument);
  const Kernel k = make_tabulated(1, {0.0, 1.0}, {1.0, 1.0});
  CHECK(k(0.5) == doctest::Approx(0.5));
}

TEST_CASE("radial integrals against closed forms") {
  // 1D box rescaled to delta: int_{|z| > a} rho / |z| = (1/delta) log(delta / a).
  const Kernel k = make_rescaled(make_box(1), 0.2);
  CHECK(k.radial_integral(0.05, 0.2, -1.0) == doctest::Approx(std::log(4.0) / 0.2).epsilon(1e-10));
  // 2D box: int rho |z|^2 = (1/pi) 2 pi / 4 = 1/2.
  CHECK(make_box(2).radial_integral(0.0, 1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-10));
  // Fractional 1D, beta = 0.5 (s = 0.75, p = 2): integral of r^{-0.5} r^{0} near 0 stays finite.
  const Kernel f = make_fractional(1, 0.75, 2.0);
  CHECK(f.radial_integral(0.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("density condition on the 1D box: I(delta) = 1/delta - 1") {
  const DensityConditionReport r = check_density_condition(make_box(1), 2.0);
  REQUIRE(r.deltas.size() == 12);
  for (std::size_t j = 0; j < r.deltas.size(); ++j) {
    CHECK(r.deltas[j] == doctest::Approx(std::ldexp(1.0, -static_cast<int>(j) - 1)));
    CHECK(r.integrals[j] == doctest::Approx(1.0 / r.deltas[j] - 1.0).epsilon(1e-10));
  }
  CHECK(r.diverges);
  CHECK_FALSE(check_density_condition(make_annulus(1, 0.5), 2.0).diverges);
  CHECK(check_density_condition(make_fractional(2, 0.5, 2.0), 2.0).diverges);
  CHECK(check_density_condition(make_tent(2), 2.0).diverges);
  // In d = 3 a bounded kernel gives a finite I(delta) for p = 2.
  CHECK_FALSE(check_density_condition(make_box(3), 2.0).diverges);
  CHECK(check_density_condition(make_box(3), 3.0).diverges);
}

TEST_CASE("assumption (A) along rescaled sequences") {
  for (const Kernel& base : catalog(2)) {
    CAPTURE(base.family_name());
    const KernelSequence seq{[base](int n) { return make_rescaled(base, 1.0 / n); }, "delta = 1/n"};
    const AssumptionAReport r = check_assumption_A(seq, 0.01, 200);
    CHECK(r.pass);
    CHECK(r.tails.back() < 1e-3);
  }
  // A fixed kernel keeps its tail: fails.
  const KernelSequence fixed{[](int) { return make_box(1); }, "fixed"};
  CHECK_FALSE(check_assumption_A(fixed, 0.5, 20).pass);
}

TEST_CASE("profiles and signatures") {
  const Kernel k = make_rescaled(make_tent(2), 0.25);
  const RadialProfile p = k.profile();
  CHECK(p.dim == 2);
  CHECK(p.support == doctest::Approx(0.25));
  CHECK(p.value(0.1) == doctest::Approx(k(0.1)));
  CHECK(p.signature == k.signature());
  CHECK(make_rescaled(make_tent(2), 0.5).signature() != k.signature());
}
