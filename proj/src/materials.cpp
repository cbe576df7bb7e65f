#include "pdgamma/materials.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pdgamma {

double strain(double m, double t) {
  if (!(m >= 1.0)) throw std::invalid_argument("strain order m must be >= 1");
  if (!(t >= 0.0)) throw DomainError("strain needs |Dv| >= 0");
  if (m == 1.0) return t - 1.0;
  if (m == 2.0) return 0.5 * (t * t - 1.0);
  if (t == 0.0) return -1.0 / m;
  return std::expm1(m * std::log(t)) / m;
}

double strain_from_increment(double m, double x) {
  if (!(x >= -1.0)) throw DomainError("strain increment below -1");
  if (m == 2.0) return 0.5 * x;
  if (m == 1.0) return x / (std::sqrt(1.0 + x) + 1.0);
  if (x == -1.0) return -1.0 / m;
  return std::expm1(0.5 * m * std::log1p(x)) / m;
}

StrainExpansion strain_taylor(double m, const Vector& nu, const Vector& zeta, double eps) {
  if (nu.size() != zeta.size()) throw std::invalid_argument("nu and zeta must have equal dimension");
  if (std::abs(nu.norm() - 1.0) > 1e-12) throw std::invalid_argument("nu must be a unit vector");
  if (!(eps >= 0.0)) throw std::invalid_argument("eps must be nonnegative");
  const double a = nu.dot(zeta);
  StrainExpansion out;
  if (eps == 0.0) {
    out.remainder = 0.5 * (zeta.squaredNorm() + (m - 2.0) * a * a);
    return out;
  }
  out.linear = eps * a;
  // |nu + eps zeta|^2 - 1 = eps (2a + eps |zeta|^2)
  const double x = eps * (2.0 * a + eps * zeta.squaredNorm());
  out.remainder = (strain_from_increment(m, x) - out.linear) / (eps * eps);
  return out;
}

// ---------------------------------------------------------------- Potential

Potential Potential::power(double p, double scale) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("power potential needs p > 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("power potential scale must be positive");
  Potential phi;
  phi.kind_ = Kind::power;
  phi.p_ = p;
  phi.scale_ = scale;
  phi.C0_ = scale;
  phi.C1_ = scale;
  std::ostringstream os;
  os << std::setprecision(17) << "power(p=" << p << ",scale=" << scale << ")";
  phi.name_ = os.str();
  return phi;
}

Potential Potential::power_capped(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("power_capped potential needs p > 1");
  Potential phi;
  phi.kind_ = Kind::power_capped;
  phi.p_ = p;
  phi.C0_ = 1.0 / p;
  phi.C1_ = std::max(1.0 / p, 0.5);
  std::ostringstream os;
  os << std::setprecision(17) << "power_capped(p=" << p << ")";
  phi.name_ = os.str();
  return phi;
}

Potential Potential::tabulated(std::vector<double> a, std::vector<double> phi, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("tabulated potential needs growth exponent p > 1");
  if (a.size() != phi.size() || a.size() < 2) throw std::invalid_argument("tabulated potential needs >= 2 rows");
  if (a.front() != 0.0 || phi.front() != 0.0) throw std::invalid_argument("tabulated potential must start at (0, 0)");
  double prev_slope = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    if (!std::isfinite(a[k]) || !std::isfinite(phi[k])) throw std::invalid_argument("tabulated potential values must be finite");
    if (!(a[k] > a[k - 1])) throw std::invalid_argument("tabulated potential abscissae must increase");
    const double slope = (phi[k] - phi[k - 1]) / (a[k] - a[k - 1]);
    if (slope < -1e-14) throw std::invalid_argument("tabulated potential must be nondecreasing");
    if (slope < prev_slope - 1e-12 * std::max(1.0, std::abs(prev_slope))) {
      throw std::invalid_argument("tabulated potential must be convex");
    }
    prev_slope = slope;
  }
  if (!(phi[1] > 0.0)) throw std::invalid_argument("tabulated potential must vanish only at 0");
  const double tail_slope = p * phi.back() / a.back();
  if (tail_slope < prev_slope - 1e-12 * std::max(1.0, prev_slope)) {
    throw std::invalid_argument("tabulated potential: power continuation breaks convexity");
  }
  Potential out;
  out.kind_ = Kind::tabulated;
  out.p_ = p;
  out.smooth_at_zero_ = false;  // first slope phi_1 / a_1 > 0
  out.a_ = std::move(a);
  out.phi_ = std::move(phi);
  out.name_ = "tabulated";
  // Growth constants fitted on the sampling grid.
  double c0 = std::numeric_limits<double>::infinity(), c1 = 0.0;
  for (int k = 0; k <= 600; ++k) {
    const double x = std::pow(10.0, -3.0 + 6.0 * k / 600.0);
    const double v = out(x), xp = std::pow(x, p);
    if (xp > 1.0 + 1e-9) c0 = std::min(c0, v / (xp - 1.0));
    c1 = std::max(c1, v / (1.0 + xp));
  }
  out.C0_ = c0;
  out.C1_ = c1;
  return out;
}

double Potential::operator()(double a) const {
  a = std::abs(a);
  switch (kind_) {
    case Kind::power:
      if (p_ == 2.0) return scale_ * a * a;
      return scale_ * std::pow(a, p_);
    case Kind::power_capped:
      if (a <= 1.0) return 0.5 * a * a;
      return (std::pow(a, p_) - 1.0) / p_ + 0.5;
    case Kind::tabulated: {
      if (a >= a_.back()) return phi_.back() * std::pow(a / a_.back(), p_);
      const auto it = std::upper_bound(a_.begin(), a_.end(), a);
      const std::size_t k = static_cast<std::size_t>(it - a_.begin());
      const double w = (a - a_[k - 1]) / (a_[k] - a_[k - 1]);
      return (1.0 - w) * phi_[k - 1] + w * phi_[k];
    }
  }
  return 0.0;
}

double Potential::derivative(double a) const {
  a = std::abs(a);
  switch (kind_) {
    case Kind::power:
      if (p_ == 2.0) return 2.0 * scale_ * a;
      return a == 0.0 ? 0.0 : scale_ * p_ * std::pow(a, p_ - 1.0);
    case Kind::power_capped:
      if (a <= 1.0) return a;
      return std::pow(a, p_ - 1.0);
    case Kind::tabulated: {
      if (a >= a_.back()) return p_ * phi_.back() / a_.back() * std::pow(a / a_.back(), p_ - 1.0);
      const auto it = std::upper_bound(a_.begin(), a_.end(), a);
      const std::size_t k = static_cast<std::size_t>(it - a_.begin());
      return (phi_[k] - phi_[k - 1]) / (a_[k] - a_[k - 1]);
    }
  }
  return 0.0;
}

std::string Potential::signature() const {
  if (kind_ != Kind::tabulated) return name_;
  std::ostringstream os;
  os << std::setprecision(17) << "tabulated(p=" << p_ << ")[";
  for (std::size_t k = 0; k < a_.size(); ++k) os << a_[k] << ":" << phi_[k] << ";";
  os << "]";
  return os.str();
}

GrowthReport Potential::check_growth() const {
  GrowthReport rep;
  rep.C0 = C0_;
  rep.C1 = C1_;
  rep.p = p_;
  rep.worst_lower = std::numeric_limits<double>::infinity();
  rep.worst_upper = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 600; ++k) {
    const double a = std::pow(10.0, -3.0 + 6.0 * k / 600.0);
    const double v = (*this)(a), ap = std::pow(a, p_);
    const double scale = std::max(1.0, std::abs(v));
    rep.worst_lower = std::min(rep.worst_lower, (v - C0_ * (ap - 1.0)) / scale);
    rep.worst_upper = std::min(rep.worst_upper, (C1_ * (1.0 + ap) - v) / scale);
  }
  rep.lower_ok = rep.worst_lower >= -1e-12;
  rep.upper_ok = rep.worst_upper >= -1e-12;
  return rep;
}

// ----------------------------------------------------------- MicroPotential

MicroPotential::MicroPotential(MicroTag tag, std::string name, RadialProfile weight, Profile psi, double delta0,
                               std::function<double(double)> psi_ss0)
    : tag_(tag),
      name_(std::move(name)),
      weight_(std::move(weight)),
      psi_(std::move(psi)),
      delta0_(delta0),
      psi_ss0_(std::move(psi_ss0)) {
  if (!weight_.value) throw std::invalid_argument("micro-potential needs a radial weight");
  if (!psi_) throw std::invalid_argument("micro-potential needs a profile");
  if (!(delta0_ > 0.0)) throw std::invalid_argument("Hooke range delta0 must be positive");
}

namespace {

double central_second(const MicroPotential::Profile& psi, double r, double h) {
  return (psi(r, h) - 2.0 * psi(r, 0.0) + psi(r, -h)) / (h * h);
}

}  // namespace

double MicroPotential::second_derivative_at_zero(double r) const {
  if (psi_ss0_) return psi_ss0_(r);
  const double h = 1e-5;
  const double coarse = central_second(psi_, r, h);
  const double fine = central_second(psi_, r, 0.5 * h);
  const double value = (4.0 * fine - coarse) / 3.0;
  // One-sided second differences must agree with each other and the centre.
  const double hs = 1e-4;
  const double fwd = (psi_(r, 2.0 * hs) - 2.0 * psi_(r, hs) + psi_(r, 0.0)) / (hs * hs);
  const double bwd = (psi_(r, -2.0 * hs) - 2.0 * psi_(r, -hs) + psi_(r, 0.0)) / (hs * hs);
  const double tol = 1e-2 * (1.0 + std::abs(value));
  if (!std::isfinite(value) || std::abs(fwd - bwd) > tol || std::abs(fwd - value) > tol ||
      std::abs(bwd - value) > tol) {
    throw DomainError("micro-potential '" + name_ + "' is not twice differentiable at s = 0");
  }
  return value;
}

ConformanceReport MicroPotential::conformance() const {
  ConformanceReport rep;
  rep.delta0 = delta0_;
  const double R = weight_.support;
  std::vector<double> radii;
  for (int k = 1; k <= 8; ++k) radii.push_back(R * k / 8.0);

  rep.psi_zero_at_origin = true;
  rep.force_zero_at_origin = true;
  rep.nonnegative = true;
  rep.positive_away_from_zero = true;
  rep.twice_differentiable = true;
  double c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
  const double hf = 1e-6;
  for (double r : radii) {
    const double p0 = psi_(r, 0.0);
    if (std::abs(p0) > 1e-14) rep.psi_zero_at_origin = false;
    const double force = (psi_(r, hf) - psi_(r, -hf)) / (2.0 * hf);
    if (std::abs(force) > 1e-6) rep.force_zero_at_origin = false;
    try {
      (void)second_derivative_at_zero(r);
    } catch (const DomainError&) {
      rep.twice_differentiable = false;
    }
    // Strains in (-1, 10]: Psi >= 0 everywhere, > 0 outside the Hooke range.
    double inf_away = std::numeric_limits<double>::infinity(), s_min = 0.0;
    const double step = 10.999 / 2200.0;
    for (int k = 0; k <= 2200; ++k) {
      const double s = -0.999 + step * k;
      const double v = psi_(r, s);
      if (v < -1e-14) rep.nonnegative = false;
      if (std::abs(s) >= delta0_ && v < inf_away) {
        inf_away = v;
        s_min = s;
      }
    }
    // Golden-section refinement of the sampled minimum away from 0.
    if (std::isfinite(inf_away)) {
      double a = s_min - step, b = s_min + step;
      if (s_min > 0.0) a = std::max(a, delta0_);
      if (s_min < 0.0) b = std::min(b, -delta0_);
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      for (int it = 0; it < 100; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (psi_(r, c) < psi_(r, d)) {
          b = d;
        } else {
          a = c;
        }
      }
      inf_away = std::min(inf_away, psi_(r, 0.5 * (a + b)));
    }
    if (!(inf_away > 1e-12)) rep.positive_away_from_zero = false;
    // Hooke constants on |s| < delta0.
    for (int k = 1; k <= 200; ++k) {
      const double s = delta0_ * k / 201.0;
      for (double sg : {s, -s}) {
        c1 = std::min(c1, psi_(r, sg) / (sg * sg));
        const double hs = std::min(1e-4, 0.25 * delta0_);
        const double curv = (psi_(r, sg + hs) - 2.0 * psi_(r, sg) + psi_(r, sg - hs)) / (hs * hs);
        c2 = std::max(c2, std::abs(curv));
      }
    }
  }
  rep.c1 = c1;
  rep.c2 = c2;
  rep.lower_quadratic = c1 > 0.0 && std::isfinite(c1);
  rep.bounded_curvature = std::isfinite(c2);
  if (!rep.positive_away_from_zero) rep.notes.push_back("condition ii) fails: Psi vanishes at some s != 0");
  if (tag_ == MicroTag::mbm || tag_ == MicroTag::modified_mbm) {
    rep.notes.push_back("bond force vanishes beyond the breaking strain; Psi stays positive there");
  }
  return rep;
}

std::string MicroPotential::signature() const { return name_ + "|" + weight_.signature; }

namespace {

double param(const CatalogParams& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string describe(const std::string& tag, const CatalogParams& params) {
  std::ostringstream os;
  os << std::setprecision(17) << tag << "(";
  bool first = true;
  for (const auto& [k, v] : params) {
    os << (first ? "" : ",") << k << "=" << v;
    first = false;
  }
  os << ")";
  return os.str();
}

}  // namespace

std::vector<std::string> catalog_tags() {
  return {"quadratic", "mbm", "modified_mbm", "cohesive", "quartic", "two_well"};
}

MicroPotential catalog_potential(const std::string& tag, const CatalogParams& params, RadialProfile weight) {
  const std::string name = describe(tag, params);
  if (tag == "quadratic") {
    const double c = param(params, "c", 1.0);
    if (!(c > 0.0)) throw std::invalid_argument("quadratic: c must be positive");
    return MicroPotential(MicroTag::quadratic, name, std::move(weight),
                          [c](double, double s) { return c * s * s; }, 1.0, [c](double) { return 2.0 * c; });
  }
  if (tag == "mbm") {
    const double s0 = param(params, "s0", 0.1), c = param(params, "c", 2.0);
    if (!(s0 > 0.0) || !(c > 0.0)) throw std::invalid_argument("mbm: s0 and c must be positive");
    return MicroPotential(
        MicroTag::mbm, name, std::move(weight),
        [s0, c](double, double s) { return s <= s0 ? 0.5 * c * s * s : 0.5 * c * s0 * s0; }, s0,
        [c](double) { return c; });
  }
  if (tag == "modified_mbm") {
    const double s0 = param(params, "s0", 0.1), s1 = param(params, "s1", 0.2), c = param(params, "c", 2.0);
    if (!(s0 > 0.0) || !(s1 > s0) || !(c > 0.0)) {
      throw std::invalid_argument("modified_mbm: need 0 < s0 < s1 and c > 0");
    }
    // Force c s up to s0, then decaying linearly to 0 at s1.
    return MicroPotential(
        MicroTag::modified_mbm, name, std::move(weight),
        [s0, s1, c](double, double s) {
          if (s <= s0) return 0.5 * c * s * s;
          const double q = std::min(s, s1) - s0;
          const double f0 = c * s0, slope = f0 / (s1 - s0);
          return 0.5 * c * s0 * s0 + f0 * q - 0.5 * slope * q * q;
        },
        s0, [c](double) { return c; });
  }
  if (tag == "cohesive") {
    const double f_inf = param(params, "f_inf", 1.0);
    if (!(f_inf > 0.0)) throw std::invalid_argument("cohesive: f_inf must be positive");
    // f(x) = f_inf tanh(x / f_inf): f(0) = 0, f'(0) = 1, f concave, f -> f_inf.
    const double R = weight.support;
    const double delta0 = std::sqrt(f_inf / std::max(R, 1e-300)) * 0.5;
    return MicroPotential(
        MicroTag::cohesive, name, std::move(weight),
        [f_inf](double r, double s) { return f_inf * std::tanh(r * s * s / f_inf); }, delta0,
        [](double r) { return 2.0 * r; });
  }
  if (tag == "quartic") {
    // Stretch form ((1 + s)^2 - 1)^2, i.e. (|Dv|^2 - 1)^2 at m = 1.
    return MicroPotential(
        MicroTag::quartic, name, std::move(weight),
        [](double, double s) {
          const double q = s * (s + 2.0);
          return q * q;
        },
        0.5, [](double) { return 8.0; });
  }
  if (tag == "two_well") {
    const double s0 = param(params, "s0", 0.5);
    if (!(s0 > 0.0)) throw std::invalid_argument("two_well: s0 must be positive");
    return MicroPotential(
        MicroTag::two_well, name, std::move(weight),
        [s0](double, double s) { return std::min(s * s, (s - s0) * (s - s0)); }, 0.5 * s0,
        [](double) { return 2.0; });
  }
  throw std::invalid_argument("unknown micro-potential tag '" + tag + "'");
}

double rescaled_micro_energy(const MicroPotential& w, double m, const Vector& xi, const Vector& zeta, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const double r = xi.norm();
  if (!(r > 0.0)) throw DomainError("bond xi must be nonzero");
  const Vector nu = xi / r;
  const double x = eps * (2.0 * nu.dot(zeta) + eps * zeta.squaredNorm());
  if (!(x > -1.0)) throw DomainError("strain outside (-1/m, inf)");
  const double s = strain_from_increment(m, x);
  return w(r, s) / (eps * eps);
}

ConvexEnvelope convexify_1d(const std::function<double(double)>& phi, double t_min, double t_max, int n) {
  if (n < 64) throw std::invalid_argument("convexify_1d needs n >= 64");
  if (!(t_max > t_min)) throw std::invalid_argument("convexify_1d needs t_min < t_max");
  ConvexEnvelope env;
  env.t.resize(n);
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) {
    env.t[i] = (i == n - 1) ? t_max : t_min + (t_max - t_min) * i / (n - 1.0);
    f[i] = phi(env.t[i]);
    if (!std::isfinite(f[i])) throw std::invalid_argument("convexify_1d: phi not finite on grid");
  }
  // Lower hull (monotone chain); the biconjugate on a grid interpolates it.
  std::vector<int> hull;
  for (int i = 0; i < n; ++i) {
    while (hull.size() >= 2) {
      const int a = hull[hull.size() - 2], b = hull.back();
      const double cross = (env.t[b] - env.t[a]) * (f[i] - f[a]) - (f[b] - f[a]) * (env.t[i] - env.t[a]);
      if (cross <= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }
  env.value.resize(n);
  std::size_t seg = 0;
  for (int i = 0; i < n; ++i) {
    while (seg + 2 < hull.size() && hull[seg + 1] <= i) ++seg;
    const int a = hull[seg], b = hull[std::min(seg + 1, hull.size() - 1)];
    if (i == a || a == b) {
      env.value[i] = f[i];
    } else if (i == b) {
      env.value[i] = f[b];
    } else {
      const double w = (env.t[i] - env.t[a]) / (env.t[b] - env.t[a]);
      env.value[i] = std::min(f[i], (1.0 - w) * f[a] + w * f[b]);
    }
  }
  return env;
}

}  // namespace pdgamma
