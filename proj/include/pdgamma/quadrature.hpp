#pragma once

#include <vector>

#include "pdgamma/types.hpp"

namespace pdgamma {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sum to 2
};

// n-point Gauss-Legendre rule by Newton iteration on P_n.
GaussRule gauss_legendre(int n);

// Normalised surface average over S^{d-1}: sum_q w_q f(omega_q) approximates
// the mean of f over the sphere.
struct SphereQuadrature {
  int dim = 0;
  std::vector<Vector> points;
  std::vector<double> weights;
};

// d=1: {-1,+1}; d=2: `order` equispaced angles starting at 0;
// d=3: `order` Gauss-Legendre nodes in cos(theta) x 2*order equispaced phi.
SphereQuadrature sphere_quadrature(int dim, int order);

// Area of S^{d-1} (2, 2*pi, 4*pi).
double unit_sphere_area(int dim);

}  // namespace pdgamma
