#include <cmath>
#include <numbers>

#include "doctest.h"
#include "pdgamma/constructions.hpp"
#include "pdgamma/rng.hpp"

using namespace pdgamma;

TEST_CASE("sawtooth profile") {
  CHECK(sawtooth_value(1, 0.0) == 0.0);
  CHECK(sawtooth_value(1, 0.5) == doctest::Approx(0.5));
  CHECK(sawtooth_value(1, 0.25) == doctest::Approx(0.25));
  CHECK(sawtooth_value(4, 0.125) == doctest::Approx(0.125));
  CHECK(sawtooth_value(4, 0.25) == doctest::Approx(0.0).scale(1.0));
  CHECK(sawtooth_value(4, -0.0625) == doctest::Approx(0.0625));  // periodic continuation
  CHECK_THROWS_AS(sawtooth_field(4, Grid::unit(1, 16)), std::invalid_argument);
}

TEST_CASE("sawtooth energy matches 8/15 N delta") {
  for (auto [N, delta] : std::vector<std::pair<int, double>>{{1, 1e-2}, {10, 1e-3}, {2, 0.05}}) {
    const SawtoothReport r = sawtooth_energy(N, delta, delta / 32);
    CHECK(r.in_regime);
    CHECK(r.closed_form == doctest::Approx(8.0 / 15.0 * N * delta));
    CHECK(r.rel_error < 0.01);
    CHECK(r.interior_value < r.energy.value);
  }
  CHECK_FALSE(sawtooth_energy(4, 0.1, 0.1 / 32).in_regime);
}

TEST_CASE("laminate profile") {
  const double lam = 0.5;
  CHECK(laminate_gamma(lam, 0.0) == 0.0);
  CHECK(laminate_gamma(lam, 1.0) == doctest::Approx(0.0).scale(1.0));
  // Peak at tau = (1 + lambda)/2 with value (1 - lambda)(1 + lambda)/2.
  CHECK(laminate_gamma(lam, 0.75) == doctest::Approx(0.375));
  CHECK(laminate_gamma(lam, 2.75) == doctest::Approx(0.375));
  // Slopes 1 - lambda and -1 - lambda, so lambda + gamma' is 1 or -1.
  const double h = 1e-6;
  CHECK((laminate_gamma(lam, 0.3 + h) - laminate_gamma(lam, 0.3)) / h == doctest::Approx(0.5));
  CHECK((laminate_gamma(lam, 0.9 + h) - laminate_gamma(lam, 0.9)) / h == doctest::Approx(-1.5));
}

TEST_CASE("laminate fields have unit stretch along the axes almost everywhere") {
  const GridPtr g = Grid::unit(2, 64);
  LaminateSpec spec;
  spec.lambda = Vector::Constant(2, 0.5);
  spec.k = 4;
  const VectorField v = laminate_field(spec, g);
  int unit = 0, total = 0;
  for (std::size_t i = 0; i + 1 < g->size(); ++i) {
    if (g->multi_index(i)[0] + 1 >= 64) continue;
    const double d = std::abs(v.value(i + 1)[0] - v.value(i)[0]) / g->spacing(0);
    unit += std::abs(d - 1.0) < 1e-9;
    ++total;
  }
  CHECK(unit > 0.8 * total);
  CHECK_THROWS_AS(laminate_field({Vector::Constant(2, 0.5), 16}, g), std::invalid_argument);
}

TEST_CASE("laminate energies along delta = 1/n^2, k = n") {
  LaminateSweep sweep;
  sweep.n = {2, 4, 8};
  const auto rows = laminate_energy_decay(Vector::Constant(1, 0.5), sweep, Potential::power(2.0, 4.0), 2.0);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].k == 2);
  CHECK(rows[1].delta == doctest::Approx(1.0 / 16));
  for (const auto& r : rows) CHECK(r.energy > 0.0);
  // Only the kinks carry energy: about k kinks of width delta.
  CHECK(rows[1].energy < rows[0].energy);
  CHECK(rows[2].energy < rows[1].energy);
}

TEST_CASE("rigidity reconstruction of exact isometries") {
  const GridPtr g = Grid::unit(2, 32);
  CounterRng rng(17);
  for (int t = 0; t < 5; ++t) {
    const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    Matrix U(2, 2);
    U << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    if (t % 2) U.col(1) *= -1.0;
    Vector b(2);
    b << rng.uniform(-1, 1), rng.uniform(-1, 1);
    const VectorField v = VectorField::sample(g, [&](const Vector& x) { return Vector(U * x + b); });
    const RigidityResult r = rigidity_reconstruct(v, 0.25);
    CHECK(r.orthogonality_error <= 1e-12);
    CHECK(r.affine_residual <= 1e-12);
    CHECK((r.F - U).norm() <= 1e-12);
    CHECK((r.b - b).norm() <= 1e-12);
  }
  const VectorField s = VectorField::sample(g, [](const Vector& x) { return Vector(2.0 * x); });
  CHECK(rigidity_reconstruct(s, 0.25).orthogonality_error > 1.0);
}

TEST_CASE("energy-decay rigidity on a sequence converging to a rotation") {
  const GridPtr g = Grid::unit(2, 16);
  std::vector<VectorField> seq;
  for (int j = 1; j <= 6; ++j) {
    seq.push_back(VectorField::sample(g, [j](const Vector& x) {
      Vector y(2);
      y << std::cos(0.4) * x[0] - std::sin(0.4) * x[1], std::sin(0.4) * x[0] + std::cos(0.4) * x[1];
      y[0] += 0.1 / (j * j) * std::sin(std::numbers::pi * x[0]) * std::sin(std::numbers::pi * x[1]);
      return y;
    }));
  }
  const EnergyDecayRigidity r =
      energy_decay_rigidity(seq, make_rescaled(make_box(2), 0.2).profile(), Potential::power(2.0), 1.0, 0.25);
  REQUIRE(r.energies.size() == 6);
  CHECK(r.energies.back() < r.energies.front());
  CHECK(r.l1_steps.size() == 5);
  CHECK(r.verdict == RigidityVerdict::rigid);
  CHECK(to_string(r.verdict) == "rigid");
}

TEST_CASE("Piola check separates affine from curved maps") {
  const GridPtr g = Grid::unit(2, 24);
  const VectorField rot = VectorField::sample(g, [](const Vector& x) {
    Vector y(2);
    y << -x[1], x[0];
    return y;
  });
  const PiolaReport a = piola_rigidity_check(rot);
  CHECK(a.orthogonality_defect < 1e-12);
  CHECK_FALSE(a.non_affine);
  CHECK(a.nodes_checked > 0);
  const VectorField curved = VectorField::sample(g, [](const Vector& x) {
    Vector y(2);
    y << x[0] * x[0], x[1];
    return y;
  });
  const PiolaReport c = piola_rigidity_check(curved);
  CHECK(c.non_affine);
  CHECK(c.hessian == doctest::Approx(2.0).epsilon(1e-6));
}
