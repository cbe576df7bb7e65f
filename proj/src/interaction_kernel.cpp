#include "pdgamma/kernels.hpp"
#include "pdgamma/materials.hpp"

namespace pdgamma {

RadialProfile derived_interaction_kernel(const MicroPotential& w) {
  // Fails early when Psi has no second derivative at 0.
  (void)w.second_derivative_at_zero(0.5 * w.weight().support);
  RadialProfile rho;
  rho.dim = w.weight().dim;
  rho.support = w.weight().support;
  const MicroPotential copy = w;
  rho.value = [copy](double r) {
    const double k = copy.weight().value(r);
    return k == 0.0 ? 0.0 : k * copy.second_derivative_at_zero(r);
  };
  rho.signature = "interaction:" + w.signature();
  return rho;
}

}  // namespace pdgamma
