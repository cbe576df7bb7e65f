#include "pdgamma/energy.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "pair_stencil.hpp"
#include "pdgamma/parallel.hpp"

namespace pdgamma {

using detail::StencilEntry;

std::string EnergyReport::to_json() const {
  nlohmann::ordered_json j;
  j["value"] = value;
  j["pair_count"] = pair_count;
  j["skipped_diagonal"] = skipped_diagonal;
  j["h"] = h;
  j["est_error"] = est_error ? nlohmann::ordered_json(*est_error) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

void richardson_estimate(const EnergyReport& coarse, EnergyReport& fine, double order) {
  fine.est_error = std::abs(fine.value - coarse.value) / (std::pow(2.0, order) - 1.0);
}

namespace {

void require_finite(const VectorField& f, const char* what) {
  if (!f.all_finite()) throw DomainError(std::string(what) + " has non-finite values");
}

double volume_power(const Grid& g) { return g.cell_volume() * g.cell_volume(); }

// Per-node partial sums over the half stencil, reduced in index order.
// `inner` may be null (all nodes active). Returns the sum over unordered pairs.
template <class Term>
double half_sum(const Grid& g, const std::vector<StencilEntry>& half, const std::uint8_t* active, const Term& term,
                std::uint64_t& pairs) {
  const std::size_t n = g.size();
  std::vector<double> partial(n, 0.0);
  std::vector<std::uint32_t> count(n, 0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (active && !active[i]) continue;
      double acc = 0.0;
      std::uint32_t c = 0;
      detail::for_each_neighbour(g, i, half, [&](std::size_t j, const StencilEntry& s) {
        if (active && !active[j]) return;
        acc += term(i, j, s);
        ++c;
      });
      partial[i] = acc;
      count[i] = c;
    }
  });
  std::uint64_t total = 0;
  for (auto c : count) total += c;
  pairs = 2 * total;
  const double sum = pairwise_sum(partial);
  if (!std::isfinite(sum)) throw NumericalError("pair sum is not finite");
  return sum;
}

std::uint64_t count_active(const std::uint8_t* active, std::size_t n) {
  if (!active) return n;
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i) c += active[i] ? 1 : 0;
  return c;
}

// |v_j - v_i|^2 / r^2
inline double stretch_sq(const VectorField& v, std::size_t i, std::size_t j, double r) {
  const auto a = v.at(i), b = v.at(j);
  double s2 = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = b[k] - a[k];
    s2 += d * d;
  }
  return s2 / (r * r);
}

inline double strain_of_sq(double m, double t2) {
  if (m == 2.0) return 0.5 * (t2 - 1.0);
  return strain(m, std::sqrt(t2));
}

// (u_j - u_i) . e / r and |u_j - u_i|^2 / r^2
inline void projected(const VectorField& u, std::size_t i, std::size_t j, const StencilEntry& s, double& along,
                      double& sq) {
  const auto a = u.at(i), b = u.at(j);
  along = 0.0;
  sq = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = (b[k] - a[k]) / s.r;
    along += d * s.e[k];
    sq += d * d;
  }
}

double load_term(const VectorField& u, const LoadField* l) {
  if (!l) return 0.0;
  if (!l->grid().same_layout(u.grid())) throw std::invalid_argument("load and field grids differ");
  require_finite(*l, "load field");
  const std::size_t n = u.size();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = u.at(i), b = l->at(i);
    double t = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) t += a[k] * b[k];
    terms[i] = t;
  }
  return pairwise_sum(terms) * u.grid().cell_volume();
}

void check_phi_m(double m) {
  if (!(m >= 1.0)) throw std::invalid_argument("strain order m must be >= 1");
}

}  // namespace

EnergyReport energy_Fn(const VectorField& v, const SubdomainMask& A, const RadialProfile& rho, const Potential& phi,
                       double m) {
  check_phi_m(m);
  if (!v.grid().same_layout(A.grid())) throw std::invalid_argument("field and subdomain grids differ");
  require_finite(v, "deformation");
  const Grid& g = v.grid();
  const auto st = detail::pair_stencil(g, rho);
  const std::uint8_t* active = A.is_full() ? nullptr : A.active_flags().data();
  EnergyReport rep;
  rep.h = g.mean_spacing();
  const double sum = half_sum(
      g, st->half, active,
      [&](std::size_t i, std::size_t j, const StencilEntry& s) {
        return s.weight * phi(std::abs(strain_of_sq(m, stretch_sq(v, i, j, s.r))));
      },
      rep.pair_count);
  rep.value = 2.0 * sum * volume_power(g);
  rep.skipped_diagonal = count_active(active, g.size());
  return rep;
}

EnergyReport energy_Fn_cross(const VectorField& v, const std::vector<std::uint8_t>& outer,
                             const std::vector<std::uint8_t>& inner, const RadialProfile& rho, const Potential& phi,
                             double m) {
  check_phi_m(m);
  require_finite(v, "deformation");
  const Grid& g = v.grid();
  if (outer.size() != g.size() || inner.size() != g.size()) throw std::invalid_argument("mask size mismatch");
  const auto st = detail::pair_stencil(g, rho);
  const std::size_t n = g.size();
  std::vector<double> partial(n, 0.0);
  std::vector<std::uint32_t> count(n, 0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (!outer[i]) continue;
      double acc = 0.0;
      std::uint32_t c = 0;
      detail::for_each_neighbour(g, i, st->full, [&](std::size_t j, const StencilEntry& s) {
        if (!inner[j]) return;
        acc += s.weight * phi(std::abs(strain_of_sq(m, stretch_sq(v, i, j, s.r))));
        ++c;
      });
      partial[i] = acc;
      count[i] = c;
    }
  });
  EnergyReport rep;
  rep.h = g.mean_spacing();
  for (auto c : count) rep.pair_count += c;
  for (std::size_t i = 0; i < n; ++i) rep.skipped_diagonal += (outer[i] && inner[i]) ? 1 : 0;
  rep.value = pairwise_sum(partial) * volume_power(g);
  if (!std::isfinite(rep.value)) throw NumericalError("pair sum is not finite");
  return rep;
}

EnergyReport energy_E_eps(const VectorField& u, const MicroPotential& w, double m, double eps, const LoadField* l) {
  check_phi_m(m);
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  require_finite(u, "displacement");
  const Grid& g = u.grid();
  const RadialProfile& k = w.weight();
  const auto st = detail::pair_stencil(g, k);
  EnergyReport rep;
  rep.h = g.mean_spacing();
  // The stencil weight already holds k(r); scale by Psi alone.
  const double sum = half_sum(
      g, st->half, nullptr,
      [&](std::size_t i, std::size_t j, const StencilEntry& s) {
        double along = 0.0, sq = 0.0;
        projected(u, i, j, s, along, sq);
        const double x = eps * (2.0 * along + eps * sq);
        if (!(x > -1.0)) {
          std::ostringstream os;
          os << "strain outside (-1/m, inf) at pair (" << i << ", " << j << ")";
          throw DomainError(os.str());
        }
        return s.weight * w.psi(s.rk, strain_from_increment(m, x));
      },
      rep.pair_count);
  rep.value = 2.0 * sum * volume_power(g) / (eps * eps) - load_term(u, l);
  rep.skipped_diagonal = g.size();
  return rep;
}

EnergyReport energy_E0(const VectorField& u, const RadialProfile& rho, const LoadField* l) {
  require_finite(u, "displacement");
  const Grid& g = u.grid();
  const auto st = detail::pair_stencil(g, rho);
  EnergyReport rep;
  rep.h = g.mean_spacing();
  const double sum = half_sum(
      g, st->half, nullptr,
      [&](std::size_t i, std::size_t j, const StencilEntry& s) {
        double along = 0.0, sq = 0.0;
        projected(u, i, j, s, along, sq);
        return s.weight * along * along;
      },
      rep.pair_count);
  // 1/2 of the ordered sum = the unordered sum.
  rep.value = sum * volume_power(g) - load_term(u, l);
  rep.skipped_diagonal = g.size();
  return rep;
}

double seminorm_W(const VectorField& v, const RadialProfile& rho, double p, const SubdomainMask& A) {
  if (!(p > 1.0)) throw std::invalid_argument("seminorm exponent p must exceed 1");
  if (!v.grid().same_layout(A.grid())) throw std::invalid_argument("field and subdomain grids differ");
  require_finite(v, "field");
  const Grid& g = v.grid();
  const auto st = detail::pair_stencil(g, rho);
  const std::uint8_t* active = A.is_full() ? nullptr : A.active_flags().data();
  std::uint64_t pairs = 0;
  const double sum = half_sum(
      g, st->half, active,
      [&](std::size_t i, std::size_t j, const StencilEntry& s) {
        const double t2 = stretch_sq(v, i, j, s.r);
        return s.weight * (p == 2.0 ? t2 : std::pow(t2, 0.5 * p));
      },
      pairs);
  return 2.0 * sum * volume_power(g);
}

double seminorm_Xrho(const VectorField& u, const RadialProfile& rho) {
  require_finite(u, "field");
  const Grid& g = u.grid();
  const auto st = detail::pair_stencil(g, rho);
  std::uint64_t pairs = 0;
  const double sum = half_sum(
      g, st->half, nullptr,
      [&](std::size_t i, std::size_t j, const StencilEntry& s) {
        double along = 0.0, sq = 0.0;
        projected(u, i, j, s, along, sq);
        return s.weight * along * along;
      },
      pairs);
  return 2.0 * sum * volume_power(g);
}

VectorField gradient_Fn(const VectorField& v, const SubdomainMask& A, const RadialProfile& rho, const Potential& phi,
                        double m) {
  check_phi_m(m);
  if (!phi.differentiable_at_zero()) {
    throw DomainError("Phi is not differentiable at 0; use energy-only experiments for this potential");
  }
  if (!v.grid().same_layout(A.grid())) throw std::invalid_argument("field and subdomain grids differ");
  require_finite(v, "deformation");
  const Grid& g = v.grid();
  const int d = g.dim();
  const auto st = detail::pair_stencil(g, rho);
  const std::uint8_t* active = A.is_full() ? nullptr : A.active_flags().data();
  VectorField grad(v.grid_ptr());
  const double scale = 2.0 * volume_power(g);
  parallel_for(g.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (active && !active[i]) continue;
      std::array<double, kMaxDim> acc{0.0, 0.0, 0.0};
      const auto vi = v.at(i);
      detail::for_each_neighbour(g, i, st->full, [&](std::size_t j, const StencilEntry& s) {
        if (active && !active[j]) return;
        const auto vj = v.at(j);
        const double t2 = stretch_sq(v, i, j, s.r);
        const double sm = strain_of_sq(m, t2);
        const double dphi = phi.derivative(std::abs(sm));
        if (dphi == 0.0) return;
        // ds/dv_i = -t^{m-2} (v_j - v_i) / r^2
        double tm2;
        if (m == 2.0) {
          tm2 = 1.0;
        } else if (t2 == 0.0) {
          return;
        } else {
          tm2 = std::pow(t2, 0.5 * (m - 2.0));
        }
        const double c = s.weight * dphi * (sm < 0.0 ? -1.0 : 1.0) * tm2 / (s.r * s.r);
        for (int k = 0; k < d; ++k) acc[k] -= c * (vj[k] - vi[k]);
      });
      auto out = grad.at(i);
      for (int k = 0; k < d; ++k) out[k] = scale * acc[k];
    }
  });
  return grad;
}

double coercivity_constant(const Potential& phi, double m) {
  const double p = phi.p();
  const double mp = std::pow(m, p);
  return std::pow(2.0, p - 1.0) * std::max(1.0 + mp, mp / phi.C0());
}

}  // namespace pdgamma
