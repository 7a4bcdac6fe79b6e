/*
 * C interface to the immse library: I-MMSE trade-off curves, trade-off
 * achieving sensor design, and Monte Carlo / zero-delay coding experiments
 * for continuous-time Gauss-Markov sources.
 *
 * Conventions
 *   - Every function that can fail returns an immse_status; on failure a
 *     message for the calling thread is available from immse_last_error().
 *   - Matrices cross the boundary as row-major double arrays.
 *   - Handles are opaque, owned by the caller, and released with the
 *     matching *_destroy function. Handles are immutable once returned and
 *     may be shared between threads.
 */
#ifndef IMMSE_H
#define IMMSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(IMMSE_BUILDING_LIBRARY)
#    define IMMSE_API __declspec(dllexport)
#  else
#    define IMMSE_API __declspec(dllimport)
#  endif
#else
#  define IMMSE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum immse_status {
  IMMSE_OK = 0,
  IMMSE_E_INVALID_ARGUMENT = 1,
  IMMSE_E_IO = 2,
  IMMSE_E_PARSE = 3,
  IMMSE_E_VALIDATION = 4,
  IMMSE_E_NOT_PSD = 5,
  IMMSE_E_DEGENERATE = 6,
  IMMSE_E_INFEASIBLE = 7,
  IMMSE_E_NOT_CONVERGED = 8,
  IMMSE_E_DIVERGED = 9,
  IMMSE_E_CONSISTENCY = 10,
  IMMSE_E_INTERNAL = 11
} immse_status;

typedef struct immse_problem immse_problem;
typedef struct immse_point immse_point;
typedef struct immse_curve immse_curve;

typedef struct immse_tolerances {
  double eig_tol;
  double psd_tol;
  double gap_tol;
  double residual_tol;
} immse_tolerances;

typedef struct immse_sim_config {
  double dt;
  double horizon;
  uint64_t trials;
  uint64_t seed;
  double burn_in_fraction;
  unsigned threads;
} immse_sim_config;

/* Scalars of one trade-off point; matrices are read separately. */
typedef struct immse_point_summary {
  double D;
  double R;             /* nats per unit time */
  double trace_P;
  double gap;           /* SDP duality gap certificate */
  double are_residual;  /* ARE residual of the recovered gain at P */
  int detectable;
  double trace_P_care;  /* trace of the independent ARE solution */
  double care_residual;
  double care_info_rate;
  int sdp_iterations;
} immse_point_summary;

typedef struct immse_estimate {
  double mean;
  double stderr_;
} immse_estimate;

typedef struct immse_sim_result {
  immse_estimate mmse_rate;
  immse_estimate info_rate;
} immse_sim_result;

typedef struct immse_duncan_report {
  double mc_integral;
  double mc_stderr;
  double riccati_integral;
  double difference;
  double allowance;
  int pass;
} immse_duncan_report;

typedef struct immse_care_result {
  double residual;
  double max_closed_loop_real; /* max Re eig(A - P C'C) */
  int newton_iterations;
} immse_care_result;

typedef struct immse_zdsc_result {
  double rate_hat;        /* nats per unit time */
  double distortion_hat;
  double distortion_stderr;
  size_t K;
} immse_zdsc_result;

IMMSE_API const char* immse_version(void);
IMMSE_API const char* immse_status_name(immse_status status);
/* Message of the last failure on this thread ("" if none). */
IMMSE_API const char* immse_last_error(void);

IMMSE_API immse_tolerances immse_default_tolerances(void);

/* ---- problems ---------------------------------------------------------- */

IMMSE_API immse_status immse_problem_load_file(const char* path,
                                               immse_problem** out);
IMMSE_API immse_status immse_problem_load_json(const char* text, size_t len,
                                               immse_problem** out);
/* A is n×n, B is n×m, both row-major. tol may be NULL for defaults. */
IMMSE_API immse_status immse_problem_create(size_t n, size_t m, const double* A,
                                            const double* B,
                                            const immse_tolerances* tol,
                                            immse_problem** out);
IMMSE_API void immse_problem_destroy(immse_problem* problem);

IMMSE_API size_t immse_problem_dim(const immse_problem* problem);
IMMSE_API size_t immse_problem_noise_dim(const immse_problem* problem);
IMMSE_API uint64_t immse_problem_config_hash(const immse_problem* problem);
IMMSE_API immse_tolerances immse_problem_tolerances(const immse_problem* problem);
/* Row-major copies; buffers must hold n*n and n*m doubles. */
IMMSE_API void immse_problem_copy_A(const immse_problem* problem, double* out);
IMMSE_API void immse_problem_copy_B(const immse_problem* problem, double* out);

/* Distortion budgets from the document (0 if absent). */
IMMSE_API size_t immse_problem_distortion_count(const immse_problem* problem);
IMMSE_API int immse_problem_distortion_is_grid(const immse_problem* problem);
IMMSE_API void immse_problem_distortions(const immse_problem* problem, double* out);

/* Returns 1 and fills *out if the document has a "sim" block. */
IMMSE_API int immse_problem_sim_config(const immse_problem* problem,
                                       immse_sim_config* out);

/* ZDSC settings (τ × Δ product) from the "zdsc" block; 0 if absent. */
IMMSE_API int immse_problem_has_zdsc(const immse_problem* problem);
IMMSE_API size_t immse_problem_zdsc_count(const immse_problem* problem);
/* delta_out must hold n doubles. */
IMMSE_API immse_status immse_problem_zdsc_setting(const immse_problem* problem,
                                                  size_t index, double* tau,
                                                  double* delta_out);
IMMSE_API double immse_problem_zdsc_horizon(const immse_problem* problem);
IMMSE_API uint64_t immse_problem_zdsc_trials(const immse_problem* problem);

/* ---- model checks ------------------------------------------------------ */

IMMSE_API immse_status immse_check_detectable(const immse_problem* problem,
                                              const double* C, int* out);

/* ---- design ------------------------------------------------------------ */

IMMSE_API immse_status immse_design_sensor(const immse_problem* problem,
                                           double D, immse_point** out);
IMMSE_API void immse_point_destroy(immse_point* point);
IMMSE_API immse_point_summary immse_point_get_summary(const immse_point* point);
/* n*n row-major buffers. */
IMMSE_API void immse_point_copy_P(const immse_point* point, double* out);
IMMSE_API void immse_point_copy_C(const immse_point* point, double* out);
/* m*m row-major buffer. */
IMMSE_API void immse_point_copy_Q(const immse_point* point, double* out);

IMMSE_API immse_status immse_sweep_curve(const immse_problem* problem,
                                         const double* grid, size_t count,
                                         unsigned threads, immse_curve** out);
IMMSE_API void immse_curve_destroy(immse_curve* curve);
IMMSE_API size_t immse_curve_size(const immse_curve* curve);
/* Borrowed pointer, valid while the curve lives. */
IMMSE_API const immse_point* immse_curve_point(const immse_curve* curve,
                                               size_t index);

/* ---- Riccati ----------------------------------------------------------- */

/* P_out is n*n row-major; C is n*n row-major. */
IMMSE_API immse_status immse_solve_care(const immse_problem* problem,
                                        const double* C, double* P_out,
                                        immse_care_result* out);

/* ---- simulation -------------------------------------------------------- */

IMMSE_API immse_status immse_simulate(const immse_problem* problem,
                                      const double* C,
                                      const immse_sim_config* cfg,
                                      immse_sim_result* out);
IMMSE_API immse_status immse_duncan_check(const immse_problem* problem,
                                          const double* C,
                                          const immse_sim_config* cfg,
                                          immse_duncan_report* out);
/* Simulates and writes the first `trials_to_dump` trials as CSV files into
 * directory `dir`. */
IMMSE_API immse_status immse_dump_paths(const immse_problem* problem,
                                        const double* C,
                                        const immse_sim_config* cfg,
                                        size_t trials_to_dump, const char* dir);

/* ---- zero-delay source coding ----------------------------------------- */

/* delta holds n gains; the horizon is rounded down to K = horizon/tau
 * samples (at least one). cfg supplies dt, trials, seed and threads. */
IMMSE_API immse_status immse_zdsc_measure(const immse_problem* problem,
                                          double tau, const double* delta,
                                          double horizon,
                                          const immse_sim_config* cfg,
                                          immse_zdsc_result* out);

#ifdef __cplusplus
}
#endif

#endif /* IMMSE_H */
