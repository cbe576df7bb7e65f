/* pdgamma C interface: opaque handles, integer status codes, no exceptions
 * cross this boundary. Every function returns PDG_OK on success; on failure
 * pdg_last_error() describes the most recent error on the calling thread. */
#ifndef PDGAMMA_H
#define PDGAMMA_H

#include <stddef.h>

#if defined(PDG_BUILDING_LIBRARY)
#define PDG_API __attribute__((visibility("default")))
#else
#define PDG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdg_status {
  PDG_OK = 0,
  PDG_CONTRACT = 1,
  PDG_PARSE = 2,
  PDG_VALIDATION = 3,
  PDG_NUMERICAL = 4,
  PDG_INVALID_ARGUMENT = 5,
  PDG_UNSUPPORTED = 6,
  PDG_BUFFER_TOO_SMALL = 7,
  PDG_INTERNAL = 8
} pdg_status;

typedef struct pdg_grid pdg_grid;
typedef struct pdg_field pdg_field;
typedef struct pdg_kernel pdg_kernel;
typedef struct pdg_potential pdg_potential;
typedef struct pdg_micro pdg_micro;

PDG_API const char* pdg_version(void);
PDG_API const char* pdg_last_error(void);
/* threads <= 0 selects the hardware concurrency. */
PDG_API int pdg_set_threads(int threads);

/* Grids and fields. Arrays have dim entries; fields store dim values per
 * node in flat node order (axis 0 fastest). */
PDG_API int pdg_grid_create(int dim, const double* origin, const double* extent, const int* cells, pdg_grid** out);
PDG_API void pdg_grid_destroy(pdg_grid* grid);
PDG_API size_t pdg_grid_size(const pdg_grid* grid);
PDG_API int pdg_grid_node(const pdg_grid* grid, size_t index, double* x);

PDG_API int pdg_field_create(const pdg_grid* grid, const double* values, pdg_field** out);
PDG_API int pdg_field_identity(const pdg_grid* grid, pdg_field** out);
PDG_API void pdg_field_destroy(pdg_field* field);
/* Copies size * dim values into buf (capacity in doubles). */
PDG_API int pdg_field_values(const pdg_field* field, double* buf, size_t capacity);

/* Kernels. family: "box", "annulus", "tent", "fractional". a and b carry
 * the family parameters (annulus: a = inner radius; fractional: a = s,
 * b = p) and are ignored otherwise. delta rescales to support delta. */
PDG_API int pdg_kernel_create(int dim, const char* family, double a, double b, double delta, pdg_kernel** out);
PDG_API void pdg_kernel_destroy(pdg_kernel* kernel);
PDG_API int pdg_kernel_eval(const pdg_kernel* kernel, double r, double* value);
PDG_API int pdg_kernel_mass(const pdg_kernel* kernel, double* mass);

/* Potentials. profile: "power" (a = p, b = scale) or "power_capped" (a = p). */
PDG_API int pdg_potential_create(const char* profile, double a, double b, pdg_potential** out);
PDG_API void pdg_potential_destroy(pdg_potential* phi);

/* Catalog micro-potentials weighted by kernel; params may be NULL. */
PDG_API int pdg_micro_create(const char* tag, const pdg_kernel* weight, const char* const* param_names,
                             const double* param_values, size_t param_count, pdg_micro** out);
PDG_API void pdg_micro_destroy(pdg_micro* micro);
PDG_API int pdg_micro_psi(const pdg_micro* micro, double r, double s, double* value);

/* Energies over the whole grid, or over the box lo < x < hi when lo and hi
 * are non-NULL. */
PDG_API int pdg_energy_Fn(const pdg_field* v, const pdg_kernel* rho, const pdg_potential* phi, double m,
                          const double* lo, const double* hi, double* value);
PDG_API int pdg_gradient_Fn(const pdg_field* v, const pdg_kernel* rho, const pdg_potential* phi, double m,
                            const double* lo, const double* hi, double* grad, size_t capacity);
PDG_API int pdg_energy_E_eps(const pdg_field* u, const pdg_micro* w, double m, double eps, double* value);
PDG_API int pdg_energy_E0(const pdg_field* u, const pdg_kernel* rho, double* value);

/* Density bounds for a row-major dim x dim matrix F. out receives
 * lower, tilde, laminate_upper (laminate only in d = 2; tilde otherwise). */
PDG_API int pdg_density_bounds(int dim, const double* F, const pdg_potential* phi, double m, int order,
                               int with_laminate, double out[3]);
PDG_API int pdg_zero_set(int dim, const double* F, int* in_zero_set);

PDG_API int pdg_sawtooth_energy(int N, double delta, double h, double* energy, double* closed_form);

/* Experiment runner. seed may be NULL (config seed is used), out_dir may be
 * NULL (config output is used). Returns the process exit code 0..4. */
PDG_API int pdg_run_config(const char* path, const char* out_dir, const unsigned long long* seed, int threads);
PDG_API int pdg_validate_config(const char* path);
/* Writes a NUL-terminated listing; needed receives the required size. */
PDG_API int pdg_list_catalog(char* buf, size_t capacity, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* PDGAMMA_H */
