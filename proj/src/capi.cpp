#include "pdgamma.h"

#include <cstring>
#include <string>
#include <thread>

#include "pdgamma/constructions.hpp"
#include "pdgamma/density.hpp"
#include "pdgamma/energy.hpp"
#include "pdgamma/parallel.hpp"
#include "pdgamma/scenario.hpp"

struct pdg_grid {
  pdgamma::GridPtr grid;
};
struct pdg_field {
  pdgamma::VectorField field;
};
struct pdg_kernel {
  pdgamma::Kernel kernel;
};
struct pdg_potential {
  pdgamma::Potential phi;
};
struct pdg_micro {
  pdgamma::MicroPotential w;
};

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& message) {
  g_last_error = message;
  return code;
}

// Runs f and maps exceptions to status codes.
template <class F>
int guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return PDG_OK;
  } catch (const pdgamma::ConfigError& e) {
    return fail(PDG_VALIDATION, e.what());
  } catch (const pdgamma::Unsupported& e) {
    return fail(PDG_UNSUPPORTED, e.what());
  } catch (const pdgamma::NumericalError& e) {
    return fail(PDG_NUMERICAL, e.what());
  } catch (const pdgamma::DomainError& e) {
    return fail(PDG_INVALID_ARGUMENT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PDG_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(PDG_INTERNAL, e.what());
  } catch (...) {
    return fail(PDG_INTERNAL, "unknown error");
  }
}

#define PDG_REQUIRE(cond, msg) \
  do {                         \
    if (!(cond)) return fail(PDG_INVALID_ARGUMENT, msg); \
  } while (0)

pdgamma::SubdomainMask mask_for(const pdgamma::GridPtr& grid, const double* lo, const double* hi) {
  if (lo == nullptr || hi == nullptr) return pdgamma::SubdomainMask::full(grid);
  const int d = grid->dim();
  pdgamma::Vector a(d), b(d);
  for (int i = 0; i < d; ++i) {
    a[i] = lo[i];
    b[i] = hi[i];
  }
  return pdgamma::SubdomainMask::box(grid, a, b, 0.0);
}

pdgamma::Matrix matrix_from(int dim, const double* F) {
  pdgamma::Matrix M(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) M(i, j) = F[i * dim + j];
  }
  return M;
}

}  // namespace

extern "C" {

const char* pdg_version(void) { return "0.1.0"; }

const char* pdg_last_error(void) { return g_last_error.c_str(); }

int pdg_set_threads(int threads) {
  const unsigned hw = std::thread::hardware_concurrency();
  pdgamma::set_thread_count(threads > 0 ? threads : static_cast<int>(hw == 0 ? 1 : hw));
  return PDG_OK;
}

int pdg_grid_create(int dim, const double* origin, const double* extent, const int* cells, pdg_grid** out) {
  PDG_REQUIRE(out != nullptr && origin != nullptr && extent != nullptr && cells != nullptr, "null argument");
  PDG_REQUIRE(dim >= 1 && dim <= 3, "dim must be 1, 2 or 3");
  return guarded([&] {
    auto g = pdgamma::make_grid(dim, std::vector<double>(origin, origin + dim), std::vector<double>(extent, extent + dim),
                                std::vector<int>(cells, cells + dim));
    *out = new pdg_grid{std::move(g)};
  });
}

void pdg_grid_destroy(pdg_grid* grid) { delete grid; }

size_t pdg_grid_size(const pdg_grid* grid) { return grid ? grid->grid->size() : 0; }

int pdg_grid_node(const pdg_grid* grid, size_t index, double* x) {
  PDG_REQUIRE(grid != nullptr && x != nullptr, "null argument");
  PDG_REQUIRE(index < grid->grid->size(), "node index out of range");
  const pdgamma::Vector p = grid->grid->node(index);
  for (int i = 0; i < grid->grid->dim(); ++i) x[i] = p[i];
  return PDG_OK;
}

int pdg_field_create(const pdg_grid* grid, const double* values, pdg_field** out) {
  PDG_REQUIRE(grid != nullptr && values != nullptr && out != nullptr, "null argument");
  return guarded([&] {
    const std::size_t n = grid->grid->size() * static_cast<std::size_t>(grid->grid->dim());
    *out = new pdg_field{pdgamma::VectorField(grid->grid, std::vector<double>(values, values + n))};
  });
}

int pdg_field_identity(const pdg_grid* grid, pdg_field** out) {
  PDG_REQUIRE(grid != nullptr && out != nullptr, "null argument");
  return guarded([&] { *out = new pdg_field{pdgamma::VectorField::identity(grid->grid)}; });
}

void pdg_field_destroy(pdg_field* field) { delete field; }

int pdg_field_values(const pdg_field* field, double* buf, size_t capacity) {
  PDG_REQUIRE(field != nullptr && buf != nullptr, "null argument");
  const auto& data = field->field.data();
  if (capacity < data.size()) return fail(PDG_BUFFER_TOO_SMALL, "buffer holds fewer than size * dim values");
  std::memcpy(buf, data.data(), data.size() * sizeof(double));
  return PDG_OK;
}

int pdg_kernel_create(int dim, const char* family, double a, double b, double delta, pdg_kernel** out) {
  PDG_REQUIRE(family != nullptr && out != nullptr, "null argument");
  PDG_REQUIRE(dim >= 1 && dim <= 3, "dim must be 1, 2 or 3");
  PDG_REQUIRE(delta > 0.0, "delta must be positive");
  const std::string f = family;
  return guarded([&] {
    pdgamma::Kernel k = [&] {
      if (f == "box") return pdgamma::make_box(dim);
      if (f == "annulus") return pdgamma::make_annulus(dim, a);
      if (f == "tent") return pdgamma::make_tent(dim);
      if (f == "fractional") return pdgamma::make_fractional(dim, a, b);
      throw std::invalid_argument("unknown kernel family '" + f + "'");
    }();
    *out = new pdg_kernel{delta == 1.0 ? k : pdgamma::make_rescaled(k, delta)};
  });
}

void pdg_kernel_destroy(pdg_kernel* kernel) { delete kernel; }

int pdg_kernel_eval(const pdg_kernel* kernel, double r, double* value) {
  PDG_REQUIRE(kernel != nullptr && value != nullptr, "null argument");
  return guarded([&] { *value = kernel->kernel(r); });
}

int pdg_kernel_mass(const pdg_kernel* kernel, double* mass) {
  PDG_REQUIRE(kernel != nullptr && mass != nullptr, "null argument");
  return guarded([&] { *mass = kernel->kernel.mass(); });
}

int pdg_potential_create(const char* profile, double a, double b, pdg_potential** out) {
  PDG_REQUIRE(profile != nullptr && out != nullptr, "null argument");
  const std::string p = profile;
  return guarded([&] {
    if (p == "power") {
      *out = new pdg_potential{pdgamma::Potential::power(a, b)};
    } else if (p == "power_capped") {
      *out = new pdg_potential{pdgamma::Potential::power_capped(a)};
    } else {
      throw std::invalid_argument("unknown potential profile '" + p + "'");
    }
  });
}

void pdg_potential_destroy(pdg_potential* phi) { delete phi; }

int pdg_micro_create(const char* tag, const pdg_kernel* weight, const char* const* param_names,
                     const double* param_values, size_t param_count, pdg_micro** out) {
  PDG_REQUIRE(tag != nullptr && weight != nullptr && out != nullptr, "null argument");
  PDG_REQUIRE(param_count == 0 || (param_names != nullptr && param_values != nullptr), "null parameter arrays");
  return guarded([&] {
    pdgamma::CatalogParams params;
    for (size_t i = 0; i < param_count; ++i) {
      if (param_names[i] == nullptr) throw std::invalid_argument("null parameter name");
      params[param_names[i]] = param_values[i];
    }
    *out = new pdg_micro{pdgamma::catalog_potential(tag, params, weight->kernel.profile())};
  });
}

void pdg_micro_destroy(pdg_micro* micro) { delete micro; }

int pdg_micro_psi(const pdg_micro* micro, double r, double s, double* value) {
  PDG_REQUIRE(micro != nullptr && value != nullptr, "null argument");
  return guarded([&] { *value = micro->w.psi(r, s); });
}

int pdg_energy_Fn(const pdg_field* v, const pdg_kernel* rho, const pdg_potential* phi, double m, const double* lo,
                  const double* hi, double* value) {
  PDG_REQUIRE(v != nullptr && rho != nullptr && phi != nullptr && value != nullptr, "null argument");
  PDG_REQUIRE(rho->kernel.dim() == v->field.dim(), "kernel and field dimensions differ");
  return guarded([&] {
    const auto A = mask_for(v->field.grid_ptr(), lo, hi);
    *value = pdgamma::energy_Fn(v->field, A, rho->kernel.profile(), phi->phi, m).value;
  });
}

int pdg_gradient_Fn(const pdg_field* v, const pdg_kernel* rho, const pdg_potential* phi, double m, const double* lo,
                    const double* hi, double* grad, size_t capacity) {
  PDG_REQUIRE(v != nullptr && rho != nullptr && phi != nullptr && grad != nullptr, "null argument");
  PDG_REQUIRE(rho->kernel.dim() == v->field.dim(), "kernel and field dimensions differ");
  if (capacity < v->field.data().size()) return fail(PDG_BUFFER_TOO_SMALL, "buffer holds fewer than size * dim values");
  return guarded([&] {
    const auto A = mask_for(v->field.grid_ptr(), lo, hi);
    const auto g = pdgamma::gradient_Fn(v->field, A, rho->kernel.profile(), phi->phi, m);
    std::memcpy(grad, g.data().data(), g.data().size() * sizeof(double));
  });
}

int pdg_energy_E_eps(const pdg_field* u, const pdg_micro* w, double m, double eps, double* value) {
  PDG_REQUIRE(u != nullptr && w != nullptr && value != nullptr, "null argument");
  return guarded([&] { *value = pdgamma::energy_E_eps(u->field, w->w, m, eps, nullptr).value; });
}

int pdg_energy_E0(const pdg_field* u, const pdg_kernel* rho, double* value) {
  PDG_REQUIRE(u != nullptr && rho != nullptr && value != nullptr, "null argument");
  return guarded([&] { *value = pdgamma::energy_E0(u->field, rho->kernel.profile(), nullptr).value; });
}

int pdg_density_bounds(int dim, const double* F, const pdg_potential* phi, double m, int order, int with_laminate,
                       double out[3]) {
  PDG_REQUIRE(F != nullptr && phi != nullptr && out != nullptr, "null argument");
  PDG_REQUIRE(dim >= 1 && dim <= 3, "dim must be 1, 2 or 3");
  return guarded([&] {
    const pdgamma::Matrix M = matrix_from(dim, F);
    if (with_laminate) {
      const auto b = pdgamma::density_bounds(M, phi->phi, m, order);
      out[0] = b.lower;
      out[1] = b.tilde;
      out[2] = b.laminate_upper;
    } else {
      const auto q = pdgamma::sphere_quadrature(dim, order);
      out[0] = pdgamma::density_lower(M, phi->phi, m, q);
      out[1] = pdgamma::density_tilde(M, phi->phi, m, q);
      out[2] = out[1];
    }
  });
}

int pdg_zero_set(int dim, const double* F, int* in_zero_set) {
  PDG_REQUIRE(F != nullptr && in_zero_set != nullptr, "null argument");
  PDG_REQUIRE(dim >= 1 && dim <= 3, "dim must be 1, 2 or 3");
  return guarded([&] { *in_zero_set = pdgamma::zero_set_predicate(matrix_from(dim, F)) ? 1 : 0; });
}

int pdg_sawtooth_energy(int N, double delta, double h, double* energy, double* closed_form) {
  PDG_REQUIRE(energy != nullptr, "null argument");
  return guarded([&] {
    const auto r = pdgamma::sawtooth_energy(N, delta, h);
    *energy = r.energy.value;
    if (closed_form != nullptr) *closed_form = r.closed_form;
  });
}

int pdg_run_config(const char* path, const char* out_dir, const unsigned long long* seed, int threads) {
  if (path == nullptr) return fail(PDG_PARSE, "null config path");
  try {
    pdgamma::RunOptions options;
    if (out_dir != nullptr) options.out_dir = out_dir;
    if (seed != nullptr) options.seed = *seed;
    options.threads = threads;
    const auto outcome = pdgamma::run_config_file(path, options);
    g_last_error = outcome.exit_code == 0 ? std::string() : outcome.message;
    return outcome.exit_code;
  } catch (const std::exception& e) {
    return fail(PDG_NUMERICAL, e.what());
  }
}

int pdg_validate_config(const char* path) {
  if (path == nullptr) return fail(PDG_PARSE, "null config path");
  try {
    const auto outcome = pdgamma::validate_config_file(path);
    g_last_error = outcome.exit_code == 0 ? std::string() : outcome.message;
    return outcome.exit_code;
  } catch (const std::exception& e) {
    return fail(PDG_VALIDATION, e.what());
  }
}

int pdg_list_catalog(char* buf, size_t capacity, size_t* needed) {
  const std::string listing = pdgamma::catalog_listing();
  if (needed != nullptr) *needed = listing.size() + 1;
  if (buf == nullptr || capacity < listing.size() + 1) {
    return fail(PDG_BUFFER_TOO_SMALL, "catalog buffer too small");
  }
  std::memcpy(buf, listing.c_str(), listing.size() + 1);
  return PDG_OK;
}

}  // extern "C"
