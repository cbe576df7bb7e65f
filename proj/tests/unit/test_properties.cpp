// Seeded randomised properties across modules.
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pdgamma/density.hpp"
#include "pdgamma/energy.hpp"
#include "pdgamma/rng.hpp"

using namespace pdgamma;

namespace {

Matrix random_orthogonal(CounterRng& rng, int d) {
  Matrix A(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(A);
  return qr.householderQ() * Matrix::Identity(d, d);
}

VectorField perturbed_identity(const GridPtr& g, CounterRng& rng, double amp) {
  VectorField v = VectorField::identity(g);
  for (double& x : v.data()) x += amp * rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("F_n is invariant under rigid motions of the deformation") {
  CounterRng rng(2024);
  for (int d : {2, 3}) {
    const GridPtr g = Grid::unit(d, d == 2 ? 12 : 6);
    const RadialProfile rho = make_rescaled(make_box(d), 0.3).profile();
    for (int t = 0; t < 5; ++t) {
      const VectorField v = perturbed_identity(g, rng, 0.1);
      const Matrix Q = random_orthogonal(rng, d);
      Vector c(d);
      for (int a = 0; a < d; ++a) c[a] = rng.uniform(-3.0, 3.0);
      VectorField w(g);
      for (std::size_t i = 0; i < g->size(); ++i) w.set(i, Q * v.value(i) + c);
      for (double m : {1.0, 2.0}) {
        const double e = energy_Fn(v, SubdomainMask::full(g), rho, Potential::power(2.0), m).value;
        const double f = energy_Fn(w, SubdomainMask::full(g), rho, Potential::power(2.0), m).value;
        CHECK(f == doctest::Approx(e).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("F_n is nonnegative and monotone in the subdomain") {
  CounterRng rng(7);
  const GridPtr g = Grid::unit(2, 14);
  const RadialProfile rho = make_rescaled(make_tent(2), 0.25).profile();
  for (int t = 0; t < 10; ++t) {
    const VectorField v = perturbed_identity(g, rng, 0.2);
    const double a = rng.uniform(0.0, 0.3), b = rng.uniform(0.6, 1.0);
    const SubdomainMask small = SubdomainMask::box(g, Vector::Constant(2, a + 0.1), Vector::Constant(2, b - 0.1), 0.0);
    const SubdomainMask large = SubdomainMask::box(g, Vector::Constant(2, a), Vector::Constant(2, b), 0.0);
    const double es = energy_Fn(v, small, rho, Potential::power(2.0), 1.0).value;
    const double el = energy_Fn(v, large, rho, Potential::power(2.0), 1.0).value;
    CHECK(es >= 0.0);
    CHECK(es <= el);
  }
}

TEST_CASE("coercivity: [v]^p <= C (F_n(v) + |A|) for unit-mass kernels") {
  CounterRng rng(99);
  const GridPtr g = Grid::unit(2, 12);
  const SubdomainMask A = SubdomainMask::full(g);
  for (double p : {2.0, 3.0}) {
    for (double m : {1.0, 2.0}) {
      const Potential phi = Potential::power(p);
      const double C = coercivity_constant(phi, m);
      for (int t = 0; t < 5; ++t) {
        VectorField v(g);
        for (double& x : v.data()) x = rng.uniform(-2.0, 2.0);
        const RadialProfile rho = make_rescaled(make_box(2), 0.3).profile();
        CHECK(seminorm_W(v, rho, p, A) <= C * (energy_Fn(v, A, rho, phi, m).value + A.measure()));
      }
    }
  }
}

TEST_CASE("density ordering and frame indifference on random matrices") {
  CounterRng rng(31);
  const SphereQuadrature q2 = sphere_quadrature(2, 256), q3 = sphere_quadrature(3, 12);
  for (int t = 0; t < 30; ++t) {
    const int d = t % 2 ? 3 : 2;
    const SphereQuadrature& q = d == 2 ? q2 : q3;
    Matrix F(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) F(i, j) = rng.uniform(-2.0, 2.0);
    }
    const double m = rng.uniform() < 0.5 ? 1.0 : 2.0;
    const Potential phi = Potential::power(rng.uniform(1.5, 3.0));
    const double lo = density_lower(F, phi, m, q), ti = density_tilde(F, phi, m, q);
    CHECK(lo >= 0.0);
    CHECK(lo <= ti);
    const Matrix U = random_orthogonal(rng, d), V = random_orthogonal(rng, d);
    const Matrix G = U * F * V;
    CHECK(density_lower(G, phi, m, q) == doctest::Approx(lo).epsilon(1e-10).scale(1.0));
    CHECK(density_tilde(G, phi, m, q) == doctest::Approx(ti).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("tilde density grows along dilations away from the identity") {
  const SphereQuadrature q = sphere_quadrature(2, 128);
  const Potential phi = Potential::power(2.0);
  double prev = 0.0;
  for (double s = 1.0; s <= 3.0; s += 0.25) {
    const double v = density_tilde(s * Matrix::Identity(2, 2), phi, 1.0, q);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("strain is increasing in the stretch") {
  CounterRng rng(5);
  for (int t = 0; t < 200; ++t) {
    const double m = rng.uniform(1.0, 4.0);
    const double a = rng.uniform(0.0, 3.0), b = a + rng.uniform(1e-6, 1.0);
    CHECK(strain(m, a) < strain(m, b));
    CHECK(strain(m, a) >= -1.0 / m);
  }
}

TEST_CASE("convex envelopes of random double wells") {
  CounterRng rng(77);
  for (int t = 0; t < 10; ++t) {
    const double a = rng.uniform(0.2, 1.5), b = rng.uniform(-0.5, 0.5);
    const auto phi = [a, b](double x) { return std::pow(x * x - a, 2) + b * x; };
    const ConvexEnvelope env = convexify_1d(phi, -2.0, 2.0, 257);
    for (std::size_t i = 0; i < env.t.size(); ++i) CHECK(env.value[i] <= phi(env.t[i]) + 1e-12);
    for (std::size_t i = 1; i + 1 < env.t.size(); ++i) {
      CHECK(env.value[i + 1] - 2.0 * env.value[i] + env.value[i - 1] >= -1e-10);
    }
  }
}

TEST_CASE("rescaled kernels keep unit mass") {
  CounterRng rng(3);
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + static_cast<int>(rng.next_u64() % 3);
    const double delta = std::exp(rng.uniform(std::log(1e-3), 0.0));
    const double s = rng.uniform(0.1, 0.9);
    CHECK(make_rescaled(make_fractional(d, s, 2.0), delta).mass() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(make_rescaled(make_annulus(d, rng.uniform(0.1, 0.9)), delta).mass() == doctest::Approx(1.0).epsilon(1e-8));
  }
}
