#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pdgamma/energy.hpp"
#include "pdgamma/parallel.hpp"
#include "pdgamma/rng.hpp"

using namespace pdgamma;

namespace {

// Brute-force double loop over all node pairs with the partial-volume weight
// clamp((R - r)/h + 1/2, 0, 1).
double brute_Fn(const VectorField& v, const SubdomainMask& A, const RadialProfile& rho, const Potential& phi,
                double m) {
  const Grid& g = v.grid();
  const double h = g.mean_spacing();
  const double R = rho.support;
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!A.active(i)) continue;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j == i || !A.active(j)) continue;
      const double r = (g.node(j) - g.node(i)).norm();
      const double frac = std::clamp((R - r) / h + 0.5, 0.0, 1.0);
      if (frac == 0.0) continue;
      const double t = (v.value(j) - v.value(i)).norm() / r;
      const double s = (std::pow(t, m) - 1.0) / m;
      sum += frac * rho.value(std::min(r, R * (1 - 1e-12))) * phi(std::abs(s));
    }
  }
  return sum * g.cell_volume() * g.cell_volume();
}

VectorField random_field(const GridPtr& g, std::uint64_t seed, double scale = 1.0) {
  CounterRng rng(seed);
  VectorField v = VectorField::identity(g);
  for (double& x : v.data()) x += scale * rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("F_n matches a brute-force double loop") {
  for (int d : {1, 2}) {
    const GridPtr g = Grid::unit(d, d == 1 ? 64 : 16);
    const RadialProfile rho = make_rescaled(make_tent(d), 0.23).profile();
    const VectorField v = random_field(g, 11 + d, 0.05);
    for (double m : {1.0, 2.0}) {
      for (const Potential& phi : {Potential::power(2.0), Potential::power(3.0, 0.5), Potential::power_capped(4.0)}) {
        const SubdomainMask full = SubdomainMask::full(g);
        CHECK(energy_Fn(v, full, rho, phi, m).value == doctest::Approx(brute_Fn(v, full, rho, phi, m)).epsilon(1e-12));
        Vector lo = Vector::Constant(d, 0.2), hi = Vector::Constant(d, 0.7);
        const SubdomainMask A = SubdomainMask::box(g, lo, hi, 0.0);
        CHECK(energy_Fn(v, A, rho, phi, m).value == doctest::Approx(brute_Fn(v, A, rho, phi, m)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("affine 1D oracle: F_n(a x) = Phi(|a| - 1) * sum rho h^2") {
  const GridPtr g = Grid::unit(1, 200);
  const double h = 1.0 / 200;
  const double delta = 10.5 * h;  // every offset k <= 10 carries full weight
  const RadialProfile rho = make_rescaled(make_box(1), delta).profile();
  double pairs = 0.0;
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      if (i != j && std::abs(i - j) <= 10) pairs += 1.0;
    }
  }
  const double base = pairs * (0.5 / delta) * h * h;
  for (double a : {0.5, 2.0, -3.0}) {
    const VectorField v = VectorField::sample(g, [a](const Vector& x) { return Vector(a * x); });
    const EnergyReport r = energy_Fn(v, SubdomainMask::full(g), rho, Potential::power(2.0), 1.0);
    CHECK(r.value == doctest::Approx(base * (std::abs(a) - 1.0) * (std::abs(a) - 1.0)).epsilon(1e-12));
    CHECK(r.pair_count == static_cast<std::uint64_t>(pairs));
    CHECK(r.skipped_diagonal == 200);
    CHECK(r.h == doctest::Approx(h));
  }
}

TEST_CASE("isometries carry zero energy") {
  const GridPtr g = Grid::unit(2, 12);
  const RadialProfile rho = make_rescaled(make_box(2), 0.3).profile();
  const double c = std::cos(0.7), s = std::sin(0.7);
  const VectorField v = VectorField::sample(g, [&](const Vector& x) {
    Vector y(2);
    y << c * x[0] - s * x[1] + 3.0, s * x[0] + c * x[1] - 1.0;
    return y;
  });
  CHECK(energy_Fn(v, SubdomainMask::full(g), rho, Potential::power(2.0), 2.0).value < 1e-28);
}

TEST_CASE("cross energy with equal masks equals F_n") {
  const GridPtr g = Grid::unit(2, 10);
  const RadialProfile rho = make_rescaled(make_box(2), 0.25).profile();
  const VectorField v = random_field(g, 3, 0.1);
  const std::vector<std::uint8_t> all(g->size(), 1);
  const auto a = energy_Fn(v, SubdomainMask::full(g), rho, Potential::power(2.0), 1.0).value;
  const auto b = energy_Fn_cross(v, all, all, rho, Potential::power(2.0), 1.0).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("energies are bit-identical across thread counts") {
  const GridPtr g = Grid::unit(2, 24);
  const RadialProfile rho = make_rescaled(make_fractional(2, 0.5, 2.0), 0.2).profile();
  const VectorField v = random_field(g, 99, 0.05);
  set_thread_count(1);
  const double e1 = energy_Fn(v, SubdomainMask::full(g), rho, Potential::power(2.0), 1.0).value;
  const auto g1 = gradient_Fn(v, SubdomainMask::full(g), rho, Potential::power(2.0), 1.0).data();
  set_thread_count(7);
  const double e7 = energy_Fn(v, SubdomainMask::full(g), rho, Potential::power(2.0), 1.0).value;
  const auto g7 = gradient_Fn(v, SubdomainMask::full(g), rho, Potential::power(2.0), 1.0).data();
  set_thread_count(1);
  CHECK(e1 == e7);
  CHECK(g1 == g7);
}

TEST_CASE("gradient of F_n against central differences") {
  for (int d : {1, 2}) {
    const GridPtr g = Grid::unit(d, d == 1 ? 40 : 10);
    const RadialProfile rho = make_rescaled(make_box(d), 0.25).profile();
    const VectorField v = random_field(g, 5 + d, 0.05);
    Vector lo = Vector::Constant(d, 0.1), hi = Vector::Constant(d, 0.9);
    const SubdomainMask A = SubdomainMask::box(g, lo, hi, 0.0);
    for (double m : {1.0, 2.0}) {
      const Potential phi = Potential::power(2.0);
      const VectorField grad = gradient_Fn(v, A, rho, phi, m);
      for (std::size_t k = 0; k < v.data().size(); k += 3) {
        VectorField p = v, q = v;
        const double step = 1e-6;
        p.data()[k] += step;
        q.data()[k] -= step;
        const double fd = (energy_Fn(p, A, rho, phi, m).value - energy_Fn(q, A, rho, phi, m).value) / (2 * step);
        CHECK(grad.data()[k] == doctest::Approx(fd).epsilon(1e-5).scale(1e-10));
      }
    }
  }
}

TEST_CASE("gradient requires differentiability at zero") {
  const GridPtr g = Grid::unit(1, 16);
  const Potential t = Potential::tabulated({0.0, 1.0}, {0.0, 1.0}, 2.0);
  CHECK_THROWS_AS(gradient_Fn(VectorField::identity(g), SubdomainMask::full(g), make_box(1).profile(), t, 1.0),
                  DomainError);
}

TEST_CASE("input validation") {
  const GridPtr g = Grid::unit(1, 16);
  VectorField v = VectorField::identity(g);
  v.data()[3] = std::nan("");
  CHECK_THROWS_AS(energy_Fn(v, SubdomainMask::full(g), make_box(1).profile(), Potential::power(2.0), 1.0),
                  DomainError);
  CHECK_THROWS_AS(energy_Fn(VectorField::identity(g), SubdomainMask::full(Grid::unit(1, 8)), make_box(1).profile(),
                            Potential::power(2.0), 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(energy_Fn(VectorField::identity(g), SubdomainMask::full(g), make_box(1).profile(),
                            Potential::power(2.0), 0.5),
                  std::invalid_argument);
}

TEST_CASE("linearised energy and seminorms") {
  const GridPtr g = Grid::unit(1, 100);
  const double delta = 5.5 / 100;
  const RadialProfile k = make_rescaled(make_box(1), delta).profile();
  const VectorField u = VectorField::sample(g, [](const Vector& x) { return Vector(0.3 * x); });
  double pairs = 0.0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) pairs += (i != j && std::abs(i - j) <= 5) ? 1.0 : 0.0;
  }
  const double mass = pairs * (0.5 / delta) * 1e-4;
  CHECK(energy_E0(u, k, nullptr).value == doctest::Approx(0.5 * 0.09 * mass).epsilon(1e-12));
  CHECK(seminorm_Xrho(u, k) == doctest::Approx(0.09 * mass).epsilon(1e-12));
  CHECK(seminorm_W(u, k, 2.0, SubdomainMask::full(g)) == doctest::Approx(0.09 * mass).epsilon(1e-12));
  CHECK(seminorm_W(u, k, 3.0, SubdomainMask::full(g)) == doctest::Approx(0.027 * mass).epsilon(1e-12));
  // A constant load l: E0 shifts by - sum l.u h.
  VectorField l(g);
  for (double& x : l.data()) x = 2.0;
  double lu = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) lu += 2.0 * u.data()[i] * 0.01;
  CHECK(energy_E0(u, k, &l).value == doctest::Approx(0.5 * 0.09 * mass - lu).epsilon(1e-12));
}

TEST_CASE("collinear quadratic micro-energy equals its linearisation exactly") {
  const GridPtr g = Grid::unit(1, 120);
  const RadialProfile k = make_rescaled(make_box(1), 0.05).profile();
  const MicroPotential w = catalog_potential("quadratic", {{"c", 1.0}}, k);
  const RadialProfile rho = derived_interaction_kernel(w);
  const VectorField u = VectorField::sample(g, [](const Vector& x) { return Vector::Constant(1, std::sin(x[0])); });
  const double e0 = energy_E0(u, rho, nullptr).value;
  for (double eps : {0.2, 0.1, 0.05}) CHECK(energy_E_eps(u, w, 1.0, eps, nullptr).value == doctest::Approx(e0).epsilon(1e-13));
}

TEST_CASE("Richardson estimate") {
  EnergyReport c, f;
  c.value = 1.0;
  f.value = 1.1;
  richardson_estimate(c, f, 1.0);
  REQUIRE(f.est_error);
  CHECK(*f.est_error == doctest::Approx(0.1));
  richardson_estimate(c, f, 2.0);
  CHECK(*f.est_error == doctest::Approx(0.1 / 3.0));
  const std::string json = f.to_json();
  CHECK(json.find("\"est_error\"") != std::string::npos);
  CHECK(json.find("\"pair_count\"") != std::string::npos);
}

TEST_CASE("coercivity constant formula") {
  CHECK(coercivity_constant(Potential::power(2.0), 1.0) == doctest::Approx(2.0 * 2.0));
  CHECK(coercivity_constant(Potential::power(2.0, 0.5), 2.0) == doctest::Approx(2.0 * 8.0));
}
