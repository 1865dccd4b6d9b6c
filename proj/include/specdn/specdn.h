#ifndef SPECDN_SPECDN_H
#define SPECDN_SPECDN_H

#include <stddef.h>
#include <stdint.h>

#if defined(SPECDN_BUILDING_LIBRARY)
#define SPECDN_API __attribute__((visibility("default")))
#else
#define SPECDN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum specdn_status {
  SPECDN_OK = 0,
  SPECDN_INVALID_ARGUMENT = 1,
  SPECDN_DOMAIN = 2,
  SPECDN_NOT_CONVERGED = 3,
  SPECDN_DEGENERATE = 4,
  SPECDN_CONFIG = 5,
  SPECDN_IO = 6,
  SPECDN_SOLVER_THRESHOLD = 7,
  SPECDN_INTERNAL = 99
} specdn_status;

typedef struct specdn_measure specdn_measure;
typedef struct specdn_experiment specdn_experiment;

typedef struct specdn_complex {
  double re;
  double im;
} specdn_complex;

typedef struct specdn_solver_report {
  specdn_complex value;
  int iterations;
  double residual;
  int in_domain;
} specdn_solver_report;

/* Message of the last failed call on this thread; never NULL. */
SPECDN_API const char* specdn_last_error(void);
SPECDN_API const char* specdn_version(void);

/* Measures. Handles are released with specdn_measure_free. */
SPECDN_API specdn_status specdn_measure_from_eigenvalues(const double* eigenvalues, size_t count,
                                                         specdn_measure** out);
SPECDN_API specdn_status specdn_measure_from_atoms(const double* locations, const double* weights,
                                                   size_t count, specdn_measure** out);
SPECDN_API specdn_status specdn_measure_read_csv(const char* path, specdn_measure** out);
SPECDN_API specdn_status specdn_measure_write_csv(const specdn_measure* measure, const char* path);
SPECDN_API size_t specdn_measure_size(const specdn_measure* measure);
/* Copies min(capacity, size) atoms in ascending location order. */
SPECDN_API specdn_status specdn_measure_atoms(const specdn_measure* measure, double* locations,
                                              double* weights, size_t capacity);
SPECDN_API specdn_status specdn_measure_stieltjes(const specdn_measure* measure, specdn_complex z,
                                                  specdn_complex* out);
SPECDN_API specdn_status specdn_measure_cdf(const specdn_measure* measure, double x, double* out);
SPECDN_API specdn_status specdn_kolmogorov(const specdn_measure* a, const specdn_measure* b,
                                           double* out);
SPECDN_API specdn_status specdn_wasserstein1(const specdn_measure* a, const specdn_measure* b,
                                             double* out);
SPECDN_API void specdn_measure_free(specdn_measure* measure);

/* Solvers. */
SPECDN_API specdn_status specdn_solve_mA(const specdn_measure* f, specdn_complex z, double sigma,
                                         double y, specdn_solver_report* out);
SPECDN_API specdn_status specdn_mp_forward(const specdn_measure* h, specdn_complex z, double y,
                                           specdn_solver_report* out);

/* Experiments. run returns SPECDN_CONFIG for invalid settings and
   SPECDN_SOLVER_THRESHOLD when too few grid points could be solved. */
SPECDN_API specdn_status specdn_experiment_load(const char* config_path, specdn_experiment** out);
SPECDN_API specdn_status specdn_experiment_parse(const char* json_text, specdn_experiment** out);
SPECDN_API specdn_status specdn_experiment_set_seed(specdn_experiment* experiment, uint64_t seed);
SPECDN_API specdn_status specdn_experiment_set_output_dir(specdn_experiment* experiment,
                                                          const char* path);
/* route: "two_step", "direct" or "both". */
SPECDN_API specdn_status specdn_experiment_set_route(specdn_experiment* experiment, const char* route);
/* Nonzero skips zero pre-averaged returns instead of failing. */
SPECDN_API specdn_status specdn_experiment_set_drop_degenerate(specdn_experiment* experiment,
                                                               int drop);
/* 0 selects one worker per hardware thread. */
SPECDN_API specdn_status specdn_experiment_set_jobs(specdn_experiment* experiment, int jobs);
SPECDN_API specdn_status specdn_experiment_run(specdn_experiment* experiment);
/* Writes the pass/fail table to `table` (may be NULL). *failures receives
   the number of failed checks. */
SPECDN_API specdn_status specdn_experiment_validate(specdn_experiment* experiment, char* table,
                                                    size_t capacity, int* failures);
SPECDN_API void specdn_experiment_free(specdn_experiment* experiment);

#ifdef __cplusplus
}
#endif

#endif
