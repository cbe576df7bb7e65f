#include "pdgamma/density.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pdgamma {

Vector singular_values(const Matrix& F) {
  if (F.rows() != F.cols() || F.rows() < 1 || F.rows() > kMaxDim) {
    throw std::invalid_argument("density matrices must be square with d in {1, 2, 3}");
  }
  if (!F.allFinite()) throw DomainError("matrix has non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(F);
  return svd.singularValues();
}

namespace {

void check_q(const Matrix& F, const SphereQuadrature& q) {
  if (q.dim != F.rows()) throw std::invalid_argument("sphere quadrature dimension does not match F");
}

// Expanded squares can round slightly below zero.
double m_strain(double m, double stretch_sq) {
  return strain_from_increment(m, std::max(stretch_sq, 0.0) - 1.0);
}

// Sphere average of Phi(clip(s_m(|G w|))) with G = diag(sigma).
template <bool Positive>
double canonical_average(const Vector& sigma, const Potential& phi, double m, const SphereQuadrature& q) {
  const int d = static_cast<int>(sigma.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < q.points.size(); ++k) {
    // |G w|^2 - 1 = sum (sigma_a^2 - 1) w_a^2 on the unit sphere; exact zero at sigma = 1.
    double inc = 0.0;
    for (int a = 0; a < d; ++a) {
      const double w = q.points[k][a];
      inc += (sigma[a] - 1.0) * (sigma[a] + 1.0) * w * w;
    }
    const double s = strain_from_increment(m, std::max(inc, -1.0));
    acc += q.weights[k] * phi(Positive ? std::max(s, 0.0) : std::abs(s));
  }
  return acc;
}

// Sphere average of Phi(|s_m(|G w|)|) for a general 2x2 G on precomputed points.
double tilde_direct(const Eigen::Matrix2d& G, const Potential& phi, double m, const std::vector<Eigen::Vector2d>& pts,
                    double weight) {
  double acc = 0.0;
  for (const auto& w : pts) acc += phi(std::abs(m_strain(m, (G * w).squaredNorm())));
  return acc * weight;
}

}  // namespace

double density_lower(const Matrix& F, const Potential& phi, double m, const SphereQuadrature& q) {
  check_q(F, q);
  return canonical_average<true>(singular_values(F), phi, m, q);
}

double density_tilde(const Matrix& F, const Potential& phi, double m, const SphereQuadrature& q) {
  check_q(F, q);
  return canonical_average<false>(singular_values(F), phi, m, q);
}

namespace {

struct LamParams {
  double theta_n = 0.0, theta_a = 0.0, amp = 0.0, lambda = 0.5;
};

Eigen::Vector2d unit(double t) { return {std::cos(t), std::sin(t)}; }

}  // namespace

LaminateResult density_laminate_upper(const Matrix& F, const Potential& phi, double m, const SphereQuadrature& q,
                                      const LaminateSearch& search) {
  if (F.rows() != 2 || F.cols() != 2) throw Unsupported("laminate bound is implemented for d = 2 only");
  check_q(F, q);
  const Vector sigma = singular_values(F);
  Eigen::Matrix2d D = Eigen::Matrix2d::Zero();
  D(0, 0) = sigma[0];
  D(1, 1) = sigma[1];
  // The discrete search runs on singular values rounded to 36 mantissa bits,
  // so matrices equal up to SVD round-off take identical search decisions.
  Eigen::Matrix2d Ds = Eigen::Matrix2d::Zero();
  for (int k = 0; k < 2; ++k) {
    int e = 0;
    const double mant = std::frexp(sigma[k], &e);
    Ds(k, k) = std::ldexp(std::round(std::ldexp(mant, 36)), e - 36);
  }

  LaminateResult res;
  res.tilde = canonical_average<false>(sigma, phi, m, q);
  res.value = res.tilde;
  res.a = Vector::Zero(2);
  res.n = Vector::Zero(2);

  auto build_pts = [](const SphereQuadrature& sq) {
    std::vector<Eigen::Vector2d> pts;
    for (const auto& w : sq.points) pts.emplace_back(w[0], w[1]);
    return pts;
  };
  const int coarse_order = std::max(8, std::min(search.coarse_order, static_cast<int>(q.points.size())));
  const SphereQuadrature coarse_q = sphere_quadrature(2, coarse_order);
  const auto coarse_pts = build_pts(coarse_q);
  const auto fine_pts = build_pts(q);

  auto objective_at = [&](const Eigen::Matrix2d& D, const LamParams& P, const std::vector<Eigen::Vector2d>& pts,
                          double wgt) {
    const Eigen::Matrix2d an = P.amp * unit(P.theta_a) * unit(P.theta_n).transpose();
    const double l = P.lambda;
    return l * tilde_direct(D + (1.0 - l) * an, phi, m, pts, wgt) +
           (1.0 - l) * tilde_direct(D - l * an, phi, m, pts, wgt);
  };
  auto objective = [&](const LamParams& P, const std::vector<Eigen::Vector2d>& pts, double wgt) {
    return objective_at(Ds, P, pts, wgt);
  };

  // Coarse scan. For fixed (n, a) the stretch |G w|^2 of G = Ds + c a(x)n is
  // |Ds w|^2 + 2c (n.w)(a.Ds w) + c^2 (n.w)^2, so the per-point factors are
  // computed once per direction pair. Reflections through the axes map
  // (a, n) to an equivalent pair, so n ranges over a quarter circle.
  std::vector<std::pair<double, LamParams>> best;
  const std::size_t keep = static_cast<std::size_t>(std::max(1, search.refine_starts));
  const std::size_t nq = coarse_pts.size();
  const double cw = 1.0 / static_cast<double>(nq);
  std::vector<double> A(nq), B(nq), C(nq);
  for (std::size_t k = 0; k < nq; ++k) A[k] = (Ds * coarse_pts[k]).squaredNorm();
  auto tilde_coeffs = [&](double c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < nq; ++k) {
      const double t2 = A[k] + c * (2.0 * B[k] + c * C[k]);
      acc += phi(std::abs(m_strain(m, t2)));
    }
    return acc * cw;
  };
  const int normals = std::max(1, search.normal_angles);
  for (int in = 0; in < normals; ++in) {
    const double tn = 0.5 * std::numbers::pi * in / std::max(1, normals - 1);
    const Eigen::Vector2d nv = unit(tn);
    for (int ia = 0; ia < search.amplitude_angles; ++ia) {
      const double ta = 2.0 * std::numbers::pi * ia / search.amplitude_angles;
      const Eigen::Vector2d av = unit(ta);
      for (std::size_t k = 0; k < nq; ++k) {
        const double nw = nv.dot(coarse_pts[k]);
        B[k] = nw * av.dot(Ds * coarse_pts[k]);
        C[k] = nw * nw;
      }
      for (int ir = 1; ir <= search.amplitudes; ++ir) {
        const double amp = search.max_amplitude * ir / search.amplitudes;
        for (int il = 1; il <= search.fractions; ++il) {
          const double lam = il / (search.fractions + 1.0);
          const double v = lam * tilde_coeffs((1.0 - lam) * amp) + (1.0 - lam) * tilde_coeffs(-lam * amp);
          if (best.size() < keep || v < best.back().first) {
            best.emplace_back(v, LamParams{tn, ta, amp, lam});
            std::stable_sort(best.begin(), best.end(),
                             [](const auto& x, const auto& y) { return x.first < y.first; });
            if (best.size() > keep) best.pop_back();
          }
        }
      }
    }
  }

  // Compass refinement at the full order.
  const double fw = 1.0 / static_cast<double>(fine_pts.size());
  double best_value = std::numeric_limits<double>::infinity();
  LamParams best_p;
  for (const auto& [v0, start] : best) {
    (void)v0;
    LamParams P = start;
    double val = objective(P, fine_pts, fw);
    std::array<double, 4> step{0.5 * std::numbers::pi / std::max(1, normals - 1), 2.0 * std::numbers::pi / search.amplitude_angles,
                               search.max_amplitude / search.amplitudes, 1.0 / (search.fractions + 1.0)};
    for (int it = 0; it < search.refine_iters; ++it) {
      bool moved = false;
      for (int c = 0; c < 4; ++c) {
        for (double sgn : {1.0, -1.0}) {
          LamParams T = P;
          double* field = c == 0 ? &T.theta_n : c == 1 ? &T.theta_a : c == 2 ? &T.amp : &T.lambda;
          *field += sgn * step[c];
          if (T.amp < 0.0 || T.amp > search.max_amplitude) continue;
          if (T.lambda <= 0.0 || T.lambda >= 1.0) continue;
          const double tv = objective(T, fine_pts, fw);
          if (tv < val) {
            val = tv;
            P = T;
            moved = true;
          }
        }
      }
      if (!moved) {
        for (double& s : step) s *= 0.5;
        if (step[3] < 1e-10) break;
      }
    }
    if (val < best_value) {
      best_value = val;
      best_p = P;
    }
  }
  best_value = objective_at(D, best_p, fine_pts, fw);
  if (best_value < res.tilde) {
    res.value = best_value;
    res.improved = best_value < res.tilde - 1e-12;
    res.lambda = best_p.lambda;
    const Eigen::Vector2d a = best_p.amp * unit(best_p.theta_a), n = unit(best_p.theta_n);
    res.a << a[0], a[1];
    res.n << n[0], n[1];
  }
  const double lower = canonical_average<true>(sigma, phi, m, q);
  if (res.value < lower - 1e-9 * std::max(1.0, lower)) {
    throw NumericalError("laminate bound fell below the lower density bound");
  }
  return res;
}

bool zero_set_predicate(const Matrix& F) { return singular_values(F)[0] <= 1.0 + 1e-12; }

double fit_coercivity_constant(int dim, const Potential& phi, const SphereQuadrature& q) {
  if (q.dim != dim) throw std::invalid_argument("sphere quadrature dimension does not match");
  const double p = phi.p();
  double C = std::numeric_limits<double>::infinity();
  const int radii = 40, angles = 40;
  for (int ir = 0; ir < radii; ++ir) {
    const double R = 2.0 * std::pow(25.0, ir / (radii - 1.0));
    auto consider = [&](const Vector& sigma) {
      const double lhs = canonical_average<true>(sigma, phi, 1.0, q);
      C = std::min(C, lhs / (std::pow(R, p) - 1.0));
    };
    if (dim == 1) {
      Vector s(1);
      s << R;
      consider(s);
      continue;
    }
    for (int ia = 0; ia <= angles; ++ia) {
      const double t = 0.5 * std::numbers::pi * ia / angles;
      if (dim == 2) {
        Vector s(2);
        s << R * std::cos(t), R * std::sin(t);
        consider(s);
      } else {
        for (int ib = 0; ib <= angles; ++ib) {
          const double u = 0.5 * std::numbers::pi * ib / angles;
          Vector s(3);
          s << R * std::cos(t) * std::cos(u), R * std::sin(t) * std::cos(u), R * std::sin(u);
          consider(s);
        }
      }
    }
  }
  return 0.99 * C;
}

CoercivityCheck coercivity_check(const Matrix& F, const Potential& phi, double C, const SphereQuadrature& q) {
  CoercivityCheck out;
  out.lhs = density_lower(F, phi, 1.0, q);
  out.rhs = C * (std::pow(F.norm(), phi.p()) - 1.0);
  out.pass = out.lhs >= out.rhs - 1e-12;
  return out;
}

double frame_indifference_check(const Matrix& F, const Matrix& U, const Potential& phi, double m,
                                const SphereQuadrature& q, const LaminateSearch& search) {
  if (U.rows() != F.rows() || U.cols() != F.cols()) throw std::invalid_argument("U and F sizes differ");
  const Matrix I = Matrix::Identity(U.rows(), U.cols());
  if ((U.transpose() * U - I).cwiseAbs().maxCoeff() > 1e-12) throw std::invalid_argument("U is not orthogonal");
  const Matrix UF = U * F;
  double dev = std::abs(density_lower(UF, phi, m, q) - density_lower(F, phi, m, q));
  dev = std::max(dev, std::abs(density_tilde(UF, phi, m, q) - density_tilde(F, phi, m, q)));
  if (F.rows() == 2) {
    dev = std::max(dev, std::abs(density_laminate_upper(UF, phi, m, q, search).value -
                                 density_laminate_upper(F, phi, m, q, search).value));
  }
  return dev;
}

double one_d_exact_density(double t, const Potential& phi, double m) {
  return phi(std::max(strain(m, std::abs(t)), 0.0));
}

DensityBounds density_bounds(const Matrix& F, const Potential& phi, double m, int order, const LaminateSearch& search) {
  DensityBounds b;
  b.F = F;
  b.sigma = singular_values(F);
  b.p = phi.p();
  b.m = m;
  b.order = order;
  const SphereQuadrature q = sphere_quadrature(static_cast<int>(F.rows()), order);
  b.lower = density_lower(F, phi, m, q);
  b.tilde = density_tilde(F, phi, m, q);
  b.laminate_upper = F.rows() == 2 ? density_laminate_upper(F, phi, m, q, search).value : b.tilde;
  b.zero_set = zero_set_predicate(F);
  return b;
}

}  // namespace pdgamma
