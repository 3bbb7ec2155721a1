#ifndef SSR_SSR_H
#define SSR_SSR_H

/* C interface to the secure state reconstruction library.
 *
 * Objects are opaque handles created and destroyed through this API. Every
 * fallible call returns an ssr_status; on failure, ssr_last_error() holds a
 * message for the calling thread until its next failing call. Matrices are
 * row-major. Sensor numbers are 1-based. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define SSR_API __declspec(dllexport)
#else
#  define SSR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct ssr_system ssr_system;
typedef struct ssr_scenario ssr_scenario;
typedef struct ssr_report ssr_report;

typedef enum ssr_status {
  SSR_OK = 0,
  SSR_ERR_INVALID_ARGUMENT = 1,
  SSR_ERR_DIMENSION = 2,
  SSR_ERR_PRECONDITION = 3,
  SSR_ERR_NOT_OBSERVABLE = 4,
  SSR_ERR_CONFIG = 5,
  SSR_ERR_IO = 6,
  SSR_ERR_INTERNAL = 7
} ssr_status;

typedef enum ssr_outcome { SSR_UNIQUE = 0, SSR_AMBIGUOUS = 1, SSR_INFEASIBLE = 2 } ssr_outcome;
typedef enum ssr_format { SSR_FORMAT_HUMAN = 0, SSR_FORMAT_MACHINE = 1 } ssr_format;
typedef enum ssr_target { SSR_TARGET_SESVS = 0, SSR_TARGET_SESGC = 1 } ssr_target;

SSR_API const char* ssr_last_error(void);
SSR_API const char* ssr_status_name(ssr_status status);

/* Plants. b may be NULL when p = 0. */
SSR_API ssr_status ssr_system_create(size_t n, size_t p, size_t q, const double* a, const double* b, const double* c,
                                     ssr_system** out);
SSR_API ssr_status ssr_system_builtin(const char* name, ssr_system** out);
SSR_API void ssr_system_destroy(ssr_system* sys);
SSR_API ssr_status ssr_system_dims(const ssr_system* sys, size_t* n, size_t* p, size_t* q);

SSR_API ssr_status ssr_is_sparse_observable(const ssr_system* sys, size_t s, int* out);
/* SSR_ERR_NOT_OBSERVABLE when some size-s deletion is unobservable. */
SSR_API ssr_status ssr_sparse_lower_bound(const ssr_system* sys, size_t s, size_t* out);
/* SSR_ERR_INVALID_ARGUMENT when k > p. */
SSR_API ssr_status ssr_choose(uint64_t p, uint64_t k, uint64_t* out);

/* Reconstruction from raw arrays. outputs holds y_0..y_{steps-1} (steps x q),
 * inputs holds u_0..u_{steps-2} ((steps-1) x p, NULL when p = 0). The state
 * x_start is written to `state` (n entries) when the outcome is unique.
 * window = 0 selects the sparse observable lower bound; max_rounds = 0
 * selects n + 5. */
SSR_API ssr_status ssr_sesvs_reconstruct(const ssr_system* sys, size_t steps, const double* outputs,
                                         const double* inputs, size_t start, size_t s, size_t tau, size_t window,
                                         ssr_outcome* outcome, double* state);
SSR_API ssr_status ssr_sesgc_reconstruct(const ssr_system* sys, size_t steps, const double* outputs,
                                         const double* inputs, size_t start, size_t s, size_t window,
                                         double residual_tol, size_t max_rounds, ssr_outcome* outcome, double* state);

/* Scenarios (YAML). */
SSR_API ssr_status ssr_scenario_load_file(const char* path, ssr_scenario** out);
SSR_API ssr_status ssr_scenario_load_string(const char* yaml, ssr_scenario** out);
SSR_API void ssr_scenario_destroy(ssr_scenario* scenario);
SSR_API ssr_status ssr_scenario_set_window(ssr_scenario* scenario, size_t r);
SSR_API ssr_status ssr_scenario_set_eq_tol(ssr_scenario* scenario, double tol);
SSR_API ssr_status ssr_scenario_set_residual_tol(ssr_scenario* scenario, double tol);
SSR_API ssr_status ssr_scenario_set_max_rounds(ssr_scenario* scenario, size_t rounds);
SSR_API ssr_status ssr_scenario_set_fallback(ssr_scenario* scenario, int enabled);

/* Runs. machine_timings adds wall-clock times to the machine document. */
SSR_API ssr_status ssr_run_audit(const ssr_scenario* scenario, int machine_timings, ssr_report** out);
SSR_API ssr_status ssr_run_reconstruct(const ssr_scenario* scenario, int machine_timings, ssr_report** out);
SSR_API ssr_status ssr_run_attack_synth(const ssr_scenario* scenario, ssr_target target, int machine_timings,
                                        ssr_report** out);

/* The rendered text is owned by the caller; release it with ssr_string_free. */
SSR_API ssr_status ssr_report_render(const ssr_report* report, ssr_format format, char** out);
SSR_API int ssr_report_exit_code(const ssr_report* report);
SSR_API void ssr_report_destroy(ssr_report* report);
SSR_API void ssr_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* SSR_SSR_H */
