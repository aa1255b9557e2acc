/* C interface to the clsnet library. Every call returns a clsnet_status;
 * on failure clsnet_last_error() holds a message for the calling thread.
 * Strings handed out through char** must be released with clsnet_string_free. */
#ifndef CLSNET_CLSNET_H
#define CLSNET_CLSNET_H

#include <stddef.h>
#include <stdint.h>

#if defined(CLSNET_BUILDING_LIBRARY)
#define CLSNET_API __attribute__((visibility("default")))
#else
#define CLSNET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clsnet_status {
  CLSNET_OK = 0,
  CLSNET_ERR_INVALID_ARGUMENT = 1,
  CLSNET_ERR_OUT_OF_RANGE = 2,
  CLSNET_ERR_NOT_HERMITIAN = 3,
  CLSNET_ERR_SYMMETRY_VIOLATED = 4,
  CLSNET_ERR_STEP_UNDERFLOW = 5,
  CLSNET_ERR_NON_FINITE = 6,
  CLSNET_ERR_SCHEDULE_CONFLICT = 7,
  CLSNET_ERR_NO_ROUTE = 8,
  CLSNET_ERR_UNSCHEDULABLE = 9,
  CLSNET_ERR_CONFIG = 10,
  CLSNET_ERR_INTERNAL = 11
} clsnet_status;

typedef struct clsnet_scenario clsnet_scenario;
typedef struct clsnet_hamiltonian clsnet_hamiltonian;

CLSNET_API const char* clsnet_version(void);
CLSNET_API const char* clsnet_status_name(clsnet_status status);
/* 1 for failures of the numerics (not_hermitian, step_underflow, non_finite). */
CLSNET_API int clsnet_status_is_numerical(clsnet_status status);
CLSNET_API const char* clsnet_last_error(void);
CLSNET_API void clsnet_string_free(char* s);

/* Scenario configs ------------------------------------------------------- */
CLSNET_API clsnet_status clsnet_scenario_load(const char* path, clsnet_scenario** out);
CLSNET_API clsnet_status clsnet_scenario_parse(const char* text, const char* source_name, clsnet_scenario** out);
CLSNET_API void clsnet_scenario_free(clsnet_scenario* scenario);
CLSNET_API clsnet_status clsnet_scenario_set_seed(clsnet_scenario* scenario, uint64_t seed);
CLSNET_API clsnet_status clsnet_scenario_set_output_dir(clsnet_scenario* scenario, const char* dir);
/* Integrator tolerance; must lie in [1e-14, 1e-6]. */
CLSNET_API clsnet_status clsnet_scenario_set_tolerance(clsnet_scenario* scenario, double tol);
CLSNET_API clsnet_status clsnet_scenario_emit(const clsnet_scenario* scenario, char** yaml);
CLSNET_API clsnet_status clsnet_scenario_digest(const clsnet_scenario* scenario, char** digest);
CLSNET_API clsnet_status clsnet_scenario_action(const clsnet_scenario* scenario, char** action);

/* Runs "spectrum", "simulate", "optimize" or "route"; writes the output
 * files and returns the command's main JSON record in *report (may be NULL). */
CLSNET_API clsnet_status clsnet_run(const clsnet_scenario* scenario, const char* command, char** report);

/* Verification suite ----------------------------------------------------- */
typedef void (*clsnet_verify_callback)(int criterion, int passed, const char* line, void* user);

/* selector: NULL, "all", "6" or "1,4,13". inject_fault: 0 none, 1 flipped
 * propagator sign. One callback per criterion with its pass/fail line. */
CLSNET_API clsnet_status clsnet_verify(const char* selector, int inject_fault, clsnet_verify_callback callback,
                                       void* user, int* all_passed, char** report_json);

/* Low-level access --------------------------------------------------------- */
CLSNET_API clsnet_status clsnet_hamiltonian_star(const double couplings[4], const double potentials[5],
                                                 clsnet_hamiltonian** out);
CLSNET_API clsnet_status clsnet_hamiltonian_seven(const double couplings[6], const double potentials[7],
                                                  clsnet_hamiltonian** out);
/* n x n row-major real symmetric matrix. */
CLSNET_API clsnet_status clsnet_hamiltonian_dense(size_t n, const double* row_major, clsnet_hamiltonian** out);
CLSNET_API void clsnet_hamiltonian_free(clsnet_hamiltonian* h);
CLSNET_API size_t clsnet_hamiltonian_dimension(const clsnet_hamiltonian* h);
/* Ascending eigenvalues into eigenvalues[0..n). */
CLSNET_API clsnet_status clsnet_spectrum(const clsnet_hamiltonian* h, double* eigenvalues);
/* out = exp(-iHt) psi; psi is normalized first. */
CLSNET_API clsnet_status clsnet_evolve(const clsnet_hamiltonian* h, const double* psi_re, const double* psi_im,
                                       double t, double* out_re, double* out_im);
CLSNET_API clsnet_status clsnet_fidelity(size_t n, const double* a_re, const double* a_im, const double* b_re,
                                         const double* b_im, double* out);

#ifdef __cplusplus
}
#endif

#endif
