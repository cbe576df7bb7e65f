#include "pdgamma/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pdgamma/quadrature.hpp"
#include "pdgamma/types.hpp"

namespace pdgamma {

struct Kernel::Shape {
  KernelFamily family = KernelFamily::box;
  int dim = 1;
  double support = 1.0;  // base support radius
  double beta = 0.0;     // g(t) ~ t^{-beta} near 0
  double inner = 0.0;    // annulus inner radius
  double s = 0.0, p = 0.0;
  std::vector<double> table_r, table_g;
  std::vector<double> breaks;  // integration breakpoints in (0, support)

  double g(double t) const {
    if (t < 0.0 || t > support) return 0.0;
    switch (family) {
      case KernelFamily::box:
        return 1.0;
      case KernelFamily::annulus:
        return t >= inner ? 1.0 : 0.0;
      case KernelFamily::tent:
        return 1.0 - t;
      case KernelFamily::fractional:
        return beta == 0.0 ? (1.0 - s) : (1.0 - s) * std::pow(t, -beta);
      case KernelFamily::tabulated: {
        auto it = std::upper_bound(table_r.begin(), table_r.end(), t);
        if (it == table_r.begin()) return table_g.front();
        if (it == table_r.end()) return table_g.back();
        const std::size_t k = static_cast<std::size_t>(it - table_r.begin());
        const double r0 = table_r[k - 1], r1 = table_r[k];
        const double a = (t - r0) / (r1 - r0);
        return (1.0 - a) * table_g[k - 1] + a * table_g[k];
      }
    }
    return 0.0;
  }

  std::string describe() const {
    std::ostringstream os;
    os << std::setprecision(17);
    switch (family) {
      case KernelFamily::box:
        os << "box";
        break;
      case KernelFamily::annulus:
        os << "annulus(" << inner << ")";
        break;
      case KernelFamily::tent:
        os << "tent";
        break;
      case KernelFamily::fractional:
        os << "fractional(" << s << "," << p << ")";
        break;
      case KernelFamily::tabulated:
        os << "tabulated[";
        for (std::size_t k = 0; k < table_r.size(); ++k) os << table_r[k] << ":" << table_g[k] << ";";
        os << "]";
        break;
    }
    return os.str();
  }
};

namespace {

constexpr double kQuadTol = 1e-12;

const GaussRule& gl10() {
  static const GaussRule rule = gauss_legendre(10);
  return rule;
}

template <class F>
double gl_panel(const F& f, double a, double b) {
  const GaussRule& r = gl10();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double acc = 0.0;
  for (std::size_t q = 0; q < r.nodes.size(); ++q) acc += r.weights[q] * f(c + h * r.nodes[q]);
  return acc * h;
}

template <class F>
double adaptive(const F& f, double a, double b, double whole, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl_panel(f, a, m), right = gl_panel(f, m, b);
  const double refined = left + right;
  if (depth >= 40 || std::abs(refined - whole) <= kQuadTol * std::max(std::abs(refined), 1e-300)) {
    return refined;
  }
  return adaptive(f, a, m, left, depth + 1) + adaptive(f, m, b, right, depth + 1);
}

template <class F>
double integrate_smooth(const F& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return adaptive(f, a, b, gl_panel(f, a, b), 0);
}

}  // namespace

Kernel::Kernel(std::shared_ptr<const Shape> shape, double normalization, double scale)
    : shape_(std::move(shape)), normalization_(normalization), scale_(scale) {}

int Kernel::dim() const { return shape_->dim; }
KernelFamily Kernel::family() const { return shape_->family; }

std::string Kernel::family_name() const {
  switch (shape_->family) {
    case KernelFamily::box:
      return "box";
    case KernelFamily::annulus:
      return "annulus";
    case KernelFamily::tent:
      return "tent";
    case KernelFamily::fractional:
      return "fractional";
    case KernelFamily::tabulated:
      return "tabulated";
  }
  return "unknown";
}

double Kernel::support_radius() const { return scale_ * shape_->support; }
double Kernel::singularity_exponent() const { return shape_->beta; }

double Kernel::operator()(double r) const {
  const double t = r / scale_;
  if (t > shape_->support) return 0.0;
  return normalization_ * std::pow(scale_, -shape_->dim) * shape_->g(t);
}

// Integral of g(t) t^exponent over (a, b) within the base support. Pieces
// touching 0 are summed over dyadic annuli, closed by the power-law tail
// g(r) r^{e+1} / (e + 1 - beta) of the leading singular term.
double Kernel::base_integral(double a, double b, double exponent) const {
  const Shape& sh = *shape_;
  a = std::max(a, 0.0);
  b = std::min(b, sh.support);
  if (!(b > a)) return 0.0;
  auto f = [&](double t) { return sh.g(t) * std::pow(t, exponent); };

  std::vector<double> cuts{a};
  for (double c : sh.breaks) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k], hi = cuts[k + 1];
    if (lo > 0.0) {
      total += integrate_smooth(f, lo, hi);
      continue;
    }
    const double order = exponent + 1.0 - sh.beta;
    if (!(order > 0.0)) return std::numeric_limits<double>::infinity();
    double partial = 0.0, prev = std::numeric_limits<double>::quiet_NaN();
    double r = hi;
    int stable = 0;
    for (int j = 0; j < 400; ++j) {
      const double r2 = 0.5 * r;
      partial += integrate_smooth(f, r2, r);
      r = r2;
      const double est = partial + sh.g(r) * std::pow(r, exponent + 1.0) / order;
      if (j >= 4 && std::abs(est - prev) <= 1e-14 * std::abs(est)) {
        if (++stable >= 2) {
          prev = est;
          break;
        }
      } else {
        stable = 0;
      }
      prev = est;
    }
    total += prev;
  }
  return total;
}

double Kernel::radial_integral(double a, double b, double power) const {
  if (a < 0.0) a = 0.0;
  if (!(b > a)) return 0.0;
  const int d = shape_->dim;
  const double ta = a / scale_;
  const double tb = std::isinf(b) ? shape_->support : b / scale_;
  const double base = base_integral(ta, tb, d - 1.0 + power);
  return unit_sphere_area(d) * normalization_ * std::pow(scale_, power) * base;
}

double Kernel::mass() const { return radial_integral(0.0, support_radius(), 0.0); }

double Kernel::tail_mass(double r) const {
  if (r >= support_radius()) return 0.0;
  return radial_integral(r, std::numeric_limits<double>::infinity(), 0.0);
}

std::string Kernel::signature() const {
  std::ostringstream os;
  os << std::setprecision(17) << "d" << shape_->dim << ":" << shape_->describe() << "@" << scale_ << "*"
     << normalization_;
  return os.str();
}

RadialProfile Kernel::profile() const {
  RadialProfile prof;
  prof.dim = dim();
  prof.support = support_radius();
  const Kernel self = *this;
  prof.value = [self](double r) { return self(r); };
  prof.signature = signature();
  return prof;
}

Kernel Kernel::normalised(std::shared_ptr<const Shape> shape) {
  const Kernel probe(shape, 1.0, 1.0);
  const double m0 = probe.mass();
  if (!(m0 > 0.0) || !std::isfinite(m0)) throw std::invalid_argument("kernel has no finite positive mass");
  return Kernel(std::move(shape), 1.0 / m0, 1.0);
}

Kernel make_box(int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("kernel dimension must be 1, 2 or 3");
  auto shape = std::make_shared<Kernel::Shape>();
  shape->family = KernelFamily::box;
  shape->dim = dim;
  return Kernel::normalised(shape);
}

Kernel make_annulus(int dim, double inner) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("kernel dimension must be 1, 2 or 3");
  if (!(inner > 0.0 && inner < 1.0)) throw std::invalid_argument("annulus inner radius must lie in (0, 1)");
  auto shape = std::make_shared<Kernel::Shape>();
  shape->family = KernelFamily::annulus;
  shape->dim = dim;
  shape->inner = inner;
  shape->breaks = {inner};
  return Kernel::normalised(shape);
}

Kernel make_tent(int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("kernel dimension must be 1, 2 or 3");
  auto shape = std::make_shared<Kernel::Shape>();
  shape->family = KernelFamily::tent;
  shape->dim = dim;
  return Kernel::normalised(shape);
}

Kernel make_fractional(int dim, double s, double p) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("kernel dimension must be 1, 2 or 3");
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fractional order s must lie in (0, 1)");
  if (!(p > 1.0)) throw std::invalid_argument("fractional exponent p must exceed 1");
  auto shape = std::make_shared<Kernel::Shape>();
  shape->family = KernelFamily::fractional;
  shape->dim = dim;
  shape->s = s;
  shape->p = p;
  shape->beta = dim + s * p - p;
  if (!(shape->beta < dim)) throw std::invalid_argument("fractional kernel is not integrable");
  return Kernel::normalised(shape);
}

Kernel make_tabulated(int dim, std::vector<double> r, std::vector<double> rho) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("kernel dimension must be 1, 2 or 3");
  if (r.size() != rho.size() || r.size() < 2) throw std::invalid_argument("tabulated kernel needs >= 2 (r, rho) rows");
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (!std::isfinite(r[k]) || !std::isfinite(rho[k]) || rho[k] < 0.0 || r[k] < 0.0) {
      throw std::invalid_argument("tabulated kernel values must be finite and nonnegative");
    }
    if (k > 0 && !(r[k] > r[k - 1])) throw std::invalid_argument("tabulated kernel radii must increase");
  }
  auto shape = std::make_shared<Kernel::Shape>();
  shape->family = KernelFamily::tabulated;
  shape->dim = dim;
  shape->support = r.back();
  shape->breaks.assign(r.begin(), r.end() - 1);
  shape->table_r = std::move(r);
  shape->table_g = std::move(rho);
  return Kernel::normalised(shape);
}

Kernel make_rescaled(const Kernel& base, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("rescaling factor delta must be positive");
  return Kernel(base.shape_, base.normalization_, base.scale_ * delta);
}

AssumptionAReport check_assumption_A(const KernelSequence& seq, double delta_prime, int n_max) {
  if (!(delta_prime > 0.0)) throw std::invalid_argument("assumption (A) radius must be positive");
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  AssumptionAReport rep;
  for (int n = 1; n <= n_max; ++n) rep.tails.push_back(seq.generator(n).tail_mass(delta_prime));
  rep.monotone_from = n_max;
  for (int n = n_max - 1; n >= 1; --n) {
    if (rep.tails[n] <= rep.tails[n - 1]) {
      rep.monotone_from = n;
    } else {
      break;
    }
  }
  rep.pass = rep.tails.back() < 1e-3 && rep.monotone_from <= (n_max + 1) / 2;
  return rep;
}

DensityConditionReport check_density_condition(const Kernel& k, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("density condition needs p > 1");
  DensityConditionReport rep;
  const double R = k.support_radius();
  for (int j = 1; j <= 12; ++j) {
    const double delta = R * std::ldexp(1.0, -j);
    rep.deltas.push_back(delta);
    rep.integrals.push_back(k.radial_integral(delta, R, -p));
  }
  const std::size_t n = rep.integrals.size();
  const double last = rep.integrals[n - 1] - rep.integrals[n - 2];
  const double before = rep.integrals[n - 2] - rep.integrals[n - 3];
  rep.diverges = std::isinf(rep.integrals.back()) ||
                 (last > 1e-12 * std::abs(rep.integrals.back()) && before > 0.0 && last / before >= 0.9);
  return rep;
}

}  // namespace pdgamma
