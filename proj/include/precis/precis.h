#ifndef PRECIS_PRECIS_H
#define PRECIS_PRECIS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PRECIS_BUILDING)
#    define PRECIS_API __declspec(dllexport)
#  else
#    define PRECIS_API __declspec(dllimport)
#  endif
#else
#  define PRECIS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every fallible call returns one; the message of the most
 * recent failure on the calling thread is in precis_last_error(). */
typedef enum precis_status {
    PRECIS_OK = 0,
    PRECIS_E_INVALID_ARGUMENT = 1,
    PRECIS_E_DIMENSION = 2,
    PRECIS_E_EMPTY_SUBSET = 3,
    PRECIS_E_INVALID_SENSOR = 4,
    PRECIS_E_SYMMETRY = 5,
    PRECIS_E_UNSTABLE = 6,
    PRECIS_E_ASSIGNMENT = 7,
    PRECIS_E_PROGRAM = 8,
    PRECIS_E_INFEASIBLE = 9,
    PRECIS_E_RECOVERY = 10,
    PRECIS_E_BUDGET = 11,
    PRECIS_E_PARSE = 12,
    PRECIS_E_IO = 13,
    PRECIS_E_BUFFER_TOO_SMALL = 14,
    PRECIS_E_INTERNAL = 99
} precis_status;

typedef struct precis_plant precis_plant;
typedef struct precis_options precis_options;
typedef struct precis_result precis_result;
typedef struct precis_selection precis_selection;

PRECIS_API const char* precis_version(void);
PRECIS_API const char* precis_status_string(precis_status status);
/* Never NULL; empty when the last call on this thread succeeded. */
PRECIS_API const char* precis_last_error(void);

/* ---- plants ---------------------------------------------------------- */

PRECIS_API precis_status precis_plant_example1(precis_plant** out);
PRECIS_API precis_status precis_plant_spring_mass(int masses, precis_plant** out);
PRECIS_API precis_status precis_plant_random(uint64_t seed, int nx, int nd, int ns, precis_plant** out);
PRECIS_API precis_status precis_plant_load(const char* path, precis_plant** out);
PRECIS_API precis_status precis_plant_parse(const char* text, precis_plant** out);
PRECIS_API precis_status precis_plant_save(const precis_plant* plant, const char* path);
PRECIS_API void precis_plant_free(precis_plant* plant);

PRECIS_API precis_status precis_plant_dims(const precis_plant* plant, int* nx, int* nd, int* nz, int* ns);
/* One weight per catalog sensor. */
PRECIS_API precis_status precis_plant_set_weights(precis_plant* plant, const double* weights, int n);

/* ---- options ----------------------------------------------------------- */

PRECIS_API precis_status precis_options_create(precis_options** out);
PRECIS_API void precis_options_free(precis_options* options);

/* "hinf" or "h2" */
PRECIS_API precis_status precis_options_set_framework(precis_options* options, const char* name);
/* "observer" or "filter" */
PRECIS_API precis_status precis_options_set_estimator(precis_options* options, const char* name);
PRECIS_API precis_status precis_options_set_gamma(precis_options* options, double gamma);
/* One weight per catalog sensor; n = 0 restores the catalog weights. */
PRECIS_API precis_status precis_options_set_rho(precis_options* options, const double* rho, int n);
/* Solver settings by name: mu, eps_abs, eps_rel, max_iter, eps_p, eps_h,
 * margin_factor, inner_mu, inner_max_iter, inner_tol. */
PRECIS_API precis_status precis_options_set_admm(precis_options* options, const char* key, double value);
/* "cone-slack", "projected-least-squares" or "inner-admm" */
PRECIS_API precis_status precis_options_set_admm_mode(precis_options* options, const char* mode);
PRECIS_API precis_status precis_options_set_jobs(precis_options* options, int jobs);
PRECIS_API precis_status precis_options_set_rlm(precis_options* options, int i_max, double eps);
PRECIS_API precis_status precis_options_set_budget(precis_options* options, uint64_t budget);

/* ---- design -------------------------------------------------------------- */

/* subset: 0-based catalog ids; n = 0 selects every sensor. trace_csv, when
 * not NULL, receives the solver iteration trace, also for infeasible
 * designs. *out is NULL unless PRECIS_OK is returned. */
PRECIS_API precis_status precis_design(const precis_plant* plant, const precis_options* options, const int* subset,
                                       int n, const char* trace_csv, precis_result** out);

PRECIS_API precis_status precis_result_load(const char* path, precis_result** out);
PRECIS_API precis_status precis_result_save(const precis_result* result, const char* path);
PRECIS_API void precis_result_free(precis_result* result);

PRECIS_API double precis_result_objective(const precis_result* result);
PRECIS_API double precis_result_norm(const precis_result* result);
PRECIS_API double precis_result_gamma(const precis_result* result);
PRECIS_API int precis_result_certified(const precis_result* result);
PRECIS_API int precis_result_iterations(const precis_result* result);
/* "converged", "max-iter" or "infeasible" */
PRECIS_API const char* precis_result_status(const precis_result* result);
/* Buffers of `capacity` entries; *n receives the required size. Returns
 * PRECIS_E_BUFFER_TOO_SMALL when capacity < *n. */
PRECIS_API precis_status precis_result_subset(const precis_result* result, int* ids, int capacity, int* n);
PRECIS_API precis_status precis_result_precisions(const precis_result* result, double* p, int capacity, int* n);
PRECIS_API precis_status precis_result_scale_precisions(precis_result* result, double factor);

typedef struct precis_verification {
    double gamma;
    double norm;        /* +inf when the error system is unstable */
    int stable;
    int within_bound;   /* norm <= gamma (1 + 1e-6) */
    int spectrum_size;  /* eigenvalues of the error system matrix */
} precis_verification;

/* Recomputes the achieved norm from the stored plant, precisions and
 * estimator. gamma <= 0 keeps the stored bound. */
PRECIS_API precis_status precis_verify(const precis_result* result, double gamma, precis_verification* out);
PRECIS_API precis_status precis_result_spectrum(const precis_result* result, double* re, double* im, int capacity,
                                                int* n);

/* ---- selection ----------------------------------------------------------- */

/* algorithm: "gse", "lpe", "rlm" or "exhaustive". An infeasible outcome is
 * PRECIS_OK with precis_selection_feasible() == 0. */
PRECIS_API precis_status precis_select(const precis_plant* plant, const precis_options* options,
                                       const char* algorithm, int k, precis_selection** out);
PRECIS_API void precis_selection_free(precis_selection* selection);

PRECIS_API int precis_selection_feasible(const precis_selection* selection);
/* +inf when infeasible */
PRECIS_API double precis_selection_cost(const precis_selection* selection);
PRECIS_API int precis_selection_evaluations(const precis_selection* selection);
PRECIS_API int precis_selection_solves(const precis_selection* selection);
PRECIS_API int precis_selection_rounds(const precis_selection* selection);
PRECIS_API precis_status precis_selection_subset(const precis_selection* selection, int* ids, int capacity, int* n);
PRECIS_API precis_status precis_selection_write_trace(const precis_selection* selection, const char* path);
/* Design of the selected subset; *out is NULL when infeasible. */
PRECIS_API precis_status precis_selection_design(const precis_selection* selection, precis_result** out);

/* ---- benchmarks ---------------------------------------------------------- */

typedef struct precis_example1_summary {
    int rows;
    int rows_passed;
    int submodularity_violated;
    int supermodularity_violated;
    int pass;
    double seconds;
} precis_example1_summary;

/* options: solver settings only; NULL for defaults. */
PRECIS_API precis_status precis_bench_example1(const precis_options* options, const char* csv_path,
                                               precis_example1_summary* out);

/* Spring-mass sweep, timings of the solver only, median of `repetitions`. */
PRECIS_API precis_status precis_bench_scaling(const int* masses, int n, double gamma, int repetitions,
                                              const char* csv_path, double* slope);

typedef struct precis_algorithm_summary {
    int exact;
    int infeasible;
    int feasible_with_reference;
    double mean_pct_error;
    double sd_pct_error;
    double mean_evaluations;
} precis_algorithm_summary;

typedef struct precis_compare_summary {
    int systems;
    precis_algorithm_summary gse;
    precis_algorithm_summary lpe;
    precis_algorithm_summary rlm;
} precis_compare_summary;

/* Random ensemble with the given dimensions; the options supply framework,
 * estimator, gamma, solver settings, jobs, rlm and budget. csv_path gets the
 * deterministic table, timing_path (optional) the same table with a seconds
 * column. */
PRECIS_API precis_status precis_bench_compare(const precis_options* options, int count, uint64_t seed, int nx,
                                              int nd, int ns, int k, const char* csv_path, const char* timing_path,
                                              precis_compare_summary* out);

#ifdef __cplusplus
}
#endif

#endif
