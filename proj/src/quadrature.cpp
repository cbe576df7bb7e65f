#include "pdgamma/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pdgamma {

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre rule needs n >= 1");
  GaussRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      const double pn = (n == 1) ? x : p1;
      const double pn1 = (n == 1) ? 1.0 : p0;
      dp = n * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged root.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

double unit_sphere_area(int dim) {
  switch (dim) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * std::numbers::pi;
    case 3:
      return 4.0 * std::numbers::pi;
    default:
      throw std::invalid_argument("unsupported dimension");
  }
}

SphereQuadrature sphere_quadrature(int dim, int order) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("sphere quadrature: unsupported dimension");
  if (order < 2) throw std::invalid_argument("sphere quadrature: order must be >= 2");
  SphereQuadrature q;
  q.dim = dim;
  if (dim == 1) {
    Vector a(1), b(1);
    a << -1.0;
    b << 1.0;
    q.points = {a, b};
    q.weights = {0.5, 0.5};
    return q;
  }
  if (dim == 2) {
    q.points.reserve(order);
    for (int k = 0; k < order; ++k) {
      const double t = 2.0 * std::numbers::pi * k / order;
      Vector w(2);
      w << std::cos(t), std::sin(t);
      q.points.push_back(w);
      q.weights.push_back(1.0 / order);
    }
    return q;
  }
  const GaussRule gl = gauss_legendre(order);
  const int nphi = 2 * order;
  for (int i = 0; i < order; ++i) {
    const double ct = gl.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int k = 0; k < nphi; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / nphi;
      Vector w(3);
      w << st * std::cos(phi), st * std::sin(phi), ct;
      q.points.push_back(w);
      q.weights.push_back(gl.weights[i] / (2.0 * nphi));
    }
  }
  return q;
}

}  // namespace pdgamma
