// Acceptance criteria 1-10. Usage: acceptance [criterion ...]; no arguments
// runs all. Prints one PASS/FAIL line per criterion; exit 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pdgamma.h"
#include "pdgamma/constructions.hpp"
#include "pdgamma/density.hpp"
#include "pdgamma/energy.hpp"
#include "pdgamma/rng.hpp"
#include "pdgamma/solver.hpp"

using namespace pdgamma;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Matrix random_matrix(CounterRng& rng, int d, double range) {
  Matrix F(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) F(i, j) = rng.uniform(-range, range);
  }
  return F;
}

Matrix random_orthogonal(CounterRng& rng, int d) {
  Matrix A = random_matrix(rng, d, 1.0);
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
  if (rng.uniform() < 0.5) Q.col(0) *= -1.0;
  return Q;
}

// 1. Sawtooth anchor.
Verdict sawtooth_anchor() {
  const std::vector<std::pair<int, double>> cases{{1, 1e-2}, {10, 1e-3}, {16, 1.0 / (16.0 * 16.0) * 0.25}};
  Verdict v{true, ""};
  double worst = 0.0, slowest = 0.0;
  for (auto [N, delta] : cases) {
    Stopwatch sw;
    const SawtoothReport r = sawtooth_energy(N, delta, delta / 32.0);
    const double t = sw.seconds();
    worst = std::max(worst, r.rel_error);
    slowest = std::max(slowest, t);
    v.pass = v.pass && r.rel_error <= 0.01 && t < 10.0;
    v.detail += "(N=" + std::to_string(N) + ", E=" + fmt("%.6g", r.energy.value) + ", 8/15 N delta=" +
                fmt("%.6g", r.closed_form) + ") ";
  }
  v.detail += "max rel err " + fmt("%.3g", worst) + ", max time " + fmt("%.3g", slowest) + " s";
  return v;
}

// 2. Closed-form tilde density in d = 2: (1/32)(|F^T F - I|^2 + (|F|^2 - 2)^2 / 2).
Verdict closed_form_tilde() {
  CounterRng rng(2, 2);
  const Potential phi = Potential::power(2.0);
  Stopwatch sw;
  const SphereQuadrature q = sphere_quadrature(2, 512);
  double worst = 0.0, ratio_lo = 1e300, ratio_hi = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Matrix F = random_matrix(rng, 2, 3.0);
    const double quad = density_tilde(F, phi, 2.0, q);
    const Matrix M = F.transpose() * F - Matrix::Identity(2, 2);
    const double closed = (M.squaredNorm() + 0.5 * std::pow(F.squaredNorm() - 2.0, 2)) / 32.0;
    worst = std::max(worst, std::abs(quad - closed) / std::abs(closed));
    ratio_lo = std::min(ratio_lo, quad / closed);
    ratio_hi = std::max(ratio_hi, quad / closed);
  }
  const double t = sw.seconds();
  Verdict v;
  v.pass = worst <= 1e-9 && t < 1.0;
  v.detail = "max rel err " + fmt("%.3g", worst) + ", quadrature/closed form in [" + fmt("%.12g", ratio_lo) + ", " +
             fmt("%.12g", ratio_hi) + "], time " + fmt("%.3g", t) + " s";
  return v;
}

// 3. Bound gap witness at F = diag(4, 1/4), Phi = t^2, m = 2.
Verdict bound_gap() {
  Stopwatch sw;
  Matrix F(2, 2);
  F << 4.0, 0.0, 0.0, 0.25;
  const DensityBounds b = density_bounds(F, Potential::power(2.0), 2.0, 512);
  const double t = sw.seconds();
  const double gap_lower = b.tilde - b.lower, gap_lam = b.tilde - b.laminate_upper;
  Verdict v;
  v.pass = gap_lower > 0.01 && gap_lam > 0.01 && t < 30.0;
  v.detail = "tilde " + fmt("%.9g", b.tilde) + ", lower " + fmt("%.9g", b.lower) + " (gap " + fmt("%.4g", gap_lower) +
             "), laminate " + fmt("%.12g", b.laminate_upper) + " (gap " + fmt("%.3g", gap_lam) + "), time " +
             fmt("%.3g", t) + " s";
  return v;
}

// 4. Zero-set characterisation and laminate energy decay.
Verdict zero_set() {
  CounterRng rng(4, 4);
  const Potential phi = Potential::power(2.0);
  const SphereQuadrature q = sphere_quadrature(2, 512);
  int mismatches = 0, inside = 0;
  for (int t = 0; t < 200; ++t) {
    Matrix F = random_matrix(rng, 2, 1.0);
    F *= rng.uniform(0.5, 1.5) / singular_values(F)[0];
    const bool pred = zero_set_predicate(F);
    inside += pred;
    if (pred != (density_lower(F, phi, 1.0, q) < 1e-10)) ++mismatches;
  }
  LaminateSweep sweep;
  sweep.n = {1, 2, 3, 4, 5, 6, 7, 8};
  const auto rows = laminate_energy_decay(Vector::Constant(2, 0.5), sweep, Potential::power(2.0, 4.0), 2.0);
  bool monotone = true;
  std::string table;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].energy > rows[i - 1].energy) monotone = false;
    table += (i ? ", " : "") + fmt("%.4g", rows[i].energy);
  }
  const bool decays = rows.back().energy < 0.01 * rows.front().energy;
  Verdict v;
  v.pass = mismatches == 0 && monotone && decays;
  v.detail = "zero set: " + std::to_string(mismatches) + " mismatches in 200 (" + std::to_string(inside) +
             " inside); laminate energies [" + table + "], monotone " + (monotone ? "yes" : "no") +
             ", last/first " + fmt("%.3g", rows.back().energy / rows.front().energy);
  return v;
}

// 5. Linearisation rate.
Verdict linearization_rate() {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  Verdict v{true, ""};
  for (int d : {1, 2}) {
    const GridPtr grid = Grid::unit(d, d == 1 ? 200 : 40);
    const RadialProfile k = make_rescaled(make_box(d), d == 1 ? 0.05 : 0.1).profile();
    const VectorField u = VectorField::sample(grid, [d](const Vector& x) {
      Vector r(d);
      if (d == 1) {
        r << x[0] * x[0];
      } else {
        r << x[0] * x[0] + 0.5 * x[1], x[0] * x[1] + std::sin(x[1]);
      }
      return r;
    });
    for (const std::string tag : {"mbm", "quartic", "cohesive"}) {
      // MBM on its smooth (quadratic) branch: s0 above every strain reached.
      const CatalogParams params = tag == "mbm" ? CatalogParams{{"s0", 10.0}, {"c", 2.0}} : CatalogParams{};
      const MicroPotential w = catalog_potential(tag, params, k);
      for (double m : {1.0, 2.0}) {
        const LinearizationTable t = linearization_experiment(u, w, m, nullptr, eps);
        double max_err = 0.0;
        for (const auto& r : t.rows) max_err = std::max(max_err, r.abs_err / std::max(1.0, std::abs(r.E0)));
        const bool exact = max_err <= 1e-12;
        const bool ok = exact || (t.slope >= 0.8 && t.slope <= 1.3);
        v.pass = v.pass && ok;
        v.detail += "d" + std::to_string(d) + "/" + tag + "/m" + fmt("%g", m) + ":" +
                    (exact ? std::string("exact") : fmt("%.3f", t.slope)) + (ok ? "" : "(out)") + " ";
      }
    }
  }
  const GridPtr grid = Grid::unit(1, 200);
  const MicroPotential w = catalog_potential("quadratic", {{"c", 1.0}}, make_rescaled(make_box(1), 0.05).profile());
  const LinearizationTable t =
      linearization_experiment(VectorField::sample(grid, [](const Vector& x) { return Vector(x.array().sin()); }), w,
                               1.0, nullptr, eps);
  double worst = 0.0;
  for (const auto& r : t.rows) worst = std::max(worst, r.abs_err);
  v.pass = v.pass && worst <= 1e-12;
  v.detail += "| collinear quadratic max |E_eps - E_0| " + fmt("%.3g", worst);
  return v;
}

// 6. Gradient of F_n against central differences.
Verdict gradient_check() {
  CounterRng rng(6, 6);
  double worst = 0.0;
  int combos = 0;
  for (int d : {1, 2}) {
    const GridPtr g = Grid::unit(d, d == 1 ? 32 : 8);
    const RadialProfile rho = make_rescaled(make_box(d), 0.3).profile();
    Vector lo = Vector::Constant(d, 0.1), hi = Vector::Constant(d, 0.9);
    const SubdomainMask A = SubdomainMask::box(g, lo, hi, 0.0);
    for (double m : {1.0, 2.0}) {
      for (const Potential& phi : {Potential::power(2.0), Potential::power(3.0), Potential::power_capped(4.0)}) {
        ++combos;
        for (int t = 0; t < 10; ++t) {
          VectorField v = VectorField::identity(g);
          for (double& x : v.data()) x = 1.5 * x + 0.05 * rng.uniform(-1.0, 1.0);
          const VectorField grad = gradient_Fn(v, A, rho, phi, m);
          double num = 0.0, den = 0.0;
          for (std::size_t k = 0; k < v.data().size(); ++k) {
            const double step = 1e-6 * std::max(1.0, std::abs(v.data()[k]));
            VectorField p = v, q = v;
            p.data()[k] += step;
            q.data()[k] -= step;
            const double fd = (energy_Fn(p, A, rho, phi, m).value - energy_Fn(q, A, rho, phi, m).value) / (2 * step);
            num = std::max(num, std::abs(fd - grad.data()[k]));
            den = std::max(den, std::abs(grad.data()[k]));
          }
          worst = std::max(worst, num / den);
        }
      }
    }
  }
  return {worst <= 1e-5, std::to_string(combos) + " (d, m, Phi) combinations x 10 fields, max relative error " +
                             fmt("%.3g", worst) + " (infinity norm)"};
}

// 7. Rigidity reconstruction of exact isometries.
Verdict rigidity() {
  CounterRng rng(7, 7);
  const GridPtr g = Grid::unit(2, 32);
  double orth = 0.0, aff = 0.0;
  for (int t = 0; t < 5; ++t) {
    const Matrix U = random_orthogonal(rng, 2);
    Vector b(2);
    b << rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0);
    const VectorField v = VectorField::sample(g, [&](const Vector& x) { return Vector(U * x + b); });
    const RigidityResult r = rigidity_reconstruct(v, 0.25);
    orth = std::max(orth, r.orthogonality_error);
    aff = std::max(aff, r.affine_residual);
  }
  return {orth <= 1e-12 && aff <= 1e-12,
          "5 isometries: max |F^T F - I| " + fmt("%.3g", orth) + ", max affine residual " + fmt("%.3g", aff)};
}

// 8. Kernel battery.
Verdict kernel_battery() {
  Verdict v{true, ""};
  double worst_mass = 0.0;
  int kernels = 0;
  for (int d = 1; d <= 3; ++d) {
    // I(delta) ~ int_delta rho(r) r^{d-1-p} dr: kernels bounded and positive
    // at 0 diverge iff d <= p, the annulus never, the fractional kernel
    // (rho ~ r^{-(d+sp-p)}) always.
    const double p = 2.0;
    const bool bounded_div = d <= p;
    const std::vector<std::pair<Kernel, bool>> cat{{make_box(d), bounded_div},
                                                   {make_annulus(d, 0.5), false},
                                                   {make_tent(d), bounded_div},
                                                   {make_fractional(d, 0.5, p), true},
                                                   {make_tabulated(d, {0.0, 0.5, 1.0}, {2.0, 1.0, 0.0}), bounded_div}};
    for (const auto& [k, expect_div] : cat) {
      ++kernels;
      worst_mass = std::max(worst_mass, std::abs(k.mass() - 1.0));
      worst_mass = std::max(worst_mass, std::abs(make_rescaled(k, 0.05).mass() - 1.0));
      const Kernel base = k;
      const AssumptionAReport a =
          check_assumption_A({[base](int n) { return make_rescaled(base, 1.0 / n); }, "1/n"}, 0.01, 200);
      const bool div = check_density_condition(k, p).diverges;
      if (!a.pass || div != expect_div) {
        v.pass = false;
        v.detail += k.family_name() + "/d" + std::to_string(d) + " fails; ";
      }
    }
  }
  const DensityConditionReport box = check_density_condition(make_box(1), 2.0);
  double worst_box = 0.0;
  for (std::size_t j = 0; j < box.deltas.size(); ++j) {
    const double exact = 1.0 / box.deltas[j] - 1.0;
    worst_box = std::max(worst_box, std::abs(box.integrals[j] - exact) / exact);
  }
  v.pass = v.pass && worst_mass <= 1e-6 && worst_box <= 1e-9 && box.diverges;
  v.detail += std::to_string(kernels) + " kernels, max mass err " + fmt("%.3g", worst_mass) +
              ", 1D box I(delta) vs 1/delta - 1 max rel err " + fmt("%.3g", worst_box) + ", divergence " +
              (box.diverges ? "detected" : "missed");
  return v;
}

// 9. Frame indifference of the three density bounds.
Verdict frame_indifference() {
  CounterRng rng(9, 9);
  const Potential phi = Potential::power(2.0);
  LaminateSearch search;  // reduced grid; the invariance is what is tested
  search.normal_angles = 9;
  search.amplitude_angles = 16;
  search.amplitudes = 8;
  search.fractions = 8;
  search.coarse_order = 32;
  search.refine_starts = 2;
  search.refine_iters = 60;
  double worst = 0.0;
  Stopwatch sw;
  for (int t = 0; t < 50; ++t) {
    const Matrix F = random_matrix(rng, 2, 2.0);
    const Matrix G = random_orthogonal(rng, 2) * F * random_orthogonal(rng, 2);
    const DensityBounds a = density_bounds(F, phi, 2.0, 256, search);
    const DensityBounds b = density_bounds(G, phi, 2.0, 256, search);
    worst = std::max({worst, std::abs(a.lower - b.lower), std::abs(a.tilde - b.tilde),
                      std::abs(a.laminate_upper - b.laminate_upper)});
  }
  return {worst <= 1e-10, "50 trials, max |bound(U F V) - bound(F)| " + fmt("%.3g", worst) + ", time " +
                              fmt("%.3g", sw.seconds()) + " s"};
}

// 10. Byte-identical outputs across reruns and thread counts.
std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    files[e.path().filename().string()] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  return files;
}

Verdict determinism() {
  Verdict v{true, ""};
  for (const std::string name : {"checks", "localize", "sawtooth", "minimize"}) {
    const std::string cfg = std::string(PDG_CONFIG_DIR) + "/" + name + ".json";
    const fs::path base = fs::temp_directory_path() / ("pdgamma_acceptance_" + name);
    fs::remove_all(base);
    const unsigned long long seed = 42;
    const int r1 = pdg_run_config(cfg.c_str(), (base / "t1a").string().c_str(), &seed, 1);
    const int r2 = pdg_run_config(cfg.c_str(), (base / "t1b").string().c_str(), &seed, 1);
    const int r8 = pdg_run_config(cfg.c_str(), (base / "t8").string().c_str(), &seed, 8);
    const auto a = read_dir(base / "t1a"), b = read_dir(base / "t1b"), c = read_dir(base / "t8");
    const bool same = r1 == r2 && r1 == r8 && a == b && a == c && a.size() >= 2;
    v.pass = v.pass && same;
    v.detail += name + ": " + std::to_string(a.size()) + " files " + (same ? "identical" : "DIFFER") + "; ";
  }
  pdg_set_threads(1);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"sawtooth anchor", sawtooth_anchor},
      {"closed-form tilde density (d=2)", closed_form_tilde},
      {"bound gap witness", bound_gap},
      {"zero-set characterisation", zero_set},
      {"linearisation rate", linearization_rate},
      {"gradient correctness", gradient_check},
      {"rigidity reconstruction", rigidity},
      {"kernel battery", kernel_battery},
      {"frame indifference", frame_indifference},
      {"determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.push_back(i);
  }
  bool all = true;
  for (int c : selected) {
    if (c < 1 || c > 10) {
      std::fprintf(stderr, "unknown criterion %d\n", c);
      return 2;
    }
    Verdict v;
    try {
      v = criteria[c - 1].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all = all && v.pass;
    std::printf("criterion %d [%s]: %s - %s\n", c, criteria[c - 1].first.c_str(), v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
