#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pdgamma/energy.hpp"
#include "pdgamma/grid.hpp"
#include "pdgamma/kernels.hpp"
#include "pdgamma/materials.hpp"

namespace pdgamma {

// 1-periodic-in-1/N sawtooth: slope +1 then -1 on each tooth, v(0) = 0,
// peak 1/(2N) at the tooth centres.
double sawtooth_value(int N, double x);

// Nodal samples of v_N on a 1D grid with at least 8N cells.
VectorField sawtooth_field(int N, const GridPtr& grid);

struct SawtoothReport {
  int N = 0;
  double delta = 0.0;
  EnergyReport energy;        // x in (0, 1), y in (x - delta, x + delta)
  double interior_value = 0;  // both x and y restricted to (0, 1)
  double closed_form = 0.0;   // 8/15 N delta
  double rel_error = 0.0;
  bool in_regime = false;  // delta <= 1/(4N)
};

// Quartic bond energy (|Dv|^2 - 1)^2 = 4 s_2^2 of v_N with the box kernel
// (1/2 on |z| < 1) rescaled to delta, on a grid of spacing close to h. The
// inner variable runs over the delta-neighbourhood of [0, 1] with v_N
// continued periodically.
SawtoothReport sawtooth_energy(int N, double delta, double h);

// gamma(t) for one axis: (1 - lambda) tau for tau <= (1 + lambda)/2, else
// (-1 - lambda)(tau - 1), with tau = t mod 1.
double laminate_gamma(double lambda, double t);

struct LaminateSpec {
  Vector lambda;  // entries in [0, 1]
  int k = 1;
};

// v_k(x) = diag(lambda) x + (1/k) (gamma_i(k x_i))_i. Needs >= 8k cells per axis.
VectorField laminate_field(const LaminateSpec& spec, const GridPtr& grid);

struct LaminateDecayRow {
  int n = 0;
  int k = 0;
  double delta = 0.0;
  double h = 0.0;
  double energy = 0.0;
};

struct LaminateSweep {
  std::vector<int> n;
  std::function<double(int)> delta = [](int n) { return 1.0 / (static_cast<double>(n) * n); };
  std::function<int(int)> k = [](int n) { return n; };
  int cells_per_delta = 8;  // grid spacing h = delta / cells_per_delta (at least 8k cells)
  int max_cells = 1024;     // per axis
};

// F_n(v_{k(n)}, (0,1)^d) along the sweep with the rescaled box kernel.
std::vector<LaminateDecayRow> laminate_energy_decay(const Vector& lambda, const LaminateSweep& sweep,
                                                    const Potential& phi, double m);

struct RigidityResult {
  Matrix F;
  Vector b;
  double residual = 0.0;           // max ||v(x) - v(y)| - |x - y|| over sampled pairs
  double affine_residual = 0.0;    // max |v(x) - F x - b|
  double orthogonality_error = 0;  // |F^T F - I| (Frobenius)
};

// Reconstructs v(x) = F x + b from the nodes nearest to 0 and R e_k.
RigidityResult rigidity_reconstruct(const VectorField& v, double R);

enum class RigidityVerdict { rigid, not_rigid, inconclusive };
std::string to_string(RigidityVerdict v);

struct EnergyDecayRigidity {
  std::vector<double> energies;
  std::vector<double> l1_steps;  // discrete L1 distance between successive fields
  RigidityResult terminal;
  double tolerance = 0.0;        // 10 h
  RigidityVerdict verdict = RigidityVerdict::inconclusive;
  std::string reason;
};

// Energies of the sequence on the full grid; if they decrease to (near) 0
// the terminal field is reconstructed and judged rigid when both the
// orthogonality and the affine residual are within 10 h. Requires rho > 0
// on a ball around 0.
EnergyDecayRigidity energy_decay_rigidity(const std::vector<VectorField>& seq, const RadialProfile& rho,
                                          const Potential& phi, double m, double R);

struct PiolaReport {
  double orthogonality_defect = 0.0;  // max |grad v^T grad v - I|
  double laplacian = 0.0;             // max |Laplacian v|
  double hessian = 0.0;               // max |grad^2 v|
  std::size_t nodes_checked = 0;
  bool non_affine = false;            // hessian above the finite-difference floor
};

// Second-order central differences at nodes two cells away from the
// boundary; `mask` (optional, one flag per node) restricts to piece interiors.
PiolaReport piola_rigidity_check(const VectorField& v, const std::vector<std::uint8_t>* mask = nullptr);

}  // namespace pdgamma
