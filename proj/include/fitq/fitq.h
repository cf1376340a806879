/*
 * Copyright 2026 The fitq Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the fitq adaptive-testing library.
 *
 * Objects are opaque handles created by *_create and released by
 * *_destroy. Every fallible call returns a fitq_status; on failure a
 * human-readable message is available from fitq_last_error() on the
 * calling thread until the next failing call on that thread.
 */
#ifndef FITQ_FITQ_H
#define FITQ_FITQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(FITQ_BUILDING_LIBRARY)
#define FITQ_API __declspec(dllexport)
#else
#define FITQ_API __declspec(dllimport)
#endif
#else
#define FITQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fitq_status {
  FITQ_OK = 0,
  FITQ_ERR_DOMAIN = 1,       /* argument outside an operation's domain */
  FITQ_ERR_PRECONDITION = 2, /* documented precondition violated */
  FITQ_ERR_NUMERIC = 3,      /* solver failed to converge */
  FITQ_ERR_CONFIG = 4,       /* invalid model, policy or experiment settings */
  FITQ_ERR_IO = 5,           /* file could not be written */
  FITQ_ERR_INVALID_ARGUMENT = 6, /* null handle or output pointer */
  FITQ_ERR_INTERNAL = 7
} fitq_status;

FITQ_API const char* fitq_version(void);
FITQ_API const char* fitq_last_error(void);
FITQ_API const char* fitq_status_name(fitq_status status);

/* ---- response models ---------------------------------------------------- */

typedef struct fitq_model fitq_model;

/* name: "logistic" or "algebraic-<even k>". */
FITQ_API fitq_status fitq_model_create(const char* name, fitq_model** out);
FITQ_API void fitq_model_destroy(fitq_model* model);

FITQ_API fitq_status fitq_model_eval(const fitq_model* model, double z, double* out);
FITQ_API fitq_status fitq_model_eval_deriv(const fitq_model* model, double z, double* out);
FITQ_API fitq_status fitq_model_fisher_h(const fitq_model* model, double z, double* out);
FITQ_API fitq_status fitq_model_optimal_gap(const fitq_model* model, double* out);

typedef struct fitq_diagnostics {
  double z_star;
  double f_z_star;
  double h_z_star;
  double lambda_bar;
  double lambda_plus;
  double lambda_minus;
  double lambda_star;
  double drift;
  double inv_drift;
  double fb_slope; /* h(z_star) epsilon^2 / 2 */
  double fc_slope; /* 2 / (h(z_star) epsilon^2) */
} fitq_diagnostics;

FITQ_API fitq_status fitq_diagnostics_compute(const fitq_model* model, double epsilon,
                                              fitq_diagnostics* out);

/* ---- estimation and stopping --------------------------------------------- */

typedef struct fitq_history fitq_history;

typedef enum fitq_estimate_kind {
  FITQ_ESTIMATE_NEG_INF = -1,
  FITQ_ESTIMATE_FINITE = 0,
  FITQ_ESTIMATE_POS_INF = 1
} fitq_estimate_kind;

typedef struct fitq_estimate {
  fitq_estimate_kind kind;
  double value; /* theta_hat when finite, +/-HUGE_VAL otherwise */
} fitq_estimate;

FITQ_API fitq_status fitq_history_create(fitq_history** out);
FITQ_API void fitq_history_destroy(fitq_history* history);
FITQ_API fitq_status fitq_history_append(fitq_history* history, double x, int y);
FITQ_API size_t fitq_history_size(const fitq_history* history);
FITQ_API int64_t fitq_history_sum_y(const fitq_history* history);

/* warm_start may be NULL (search starts at 0). */
FITQ_API fitq_status fitq_mme(const fitq_history* history, const fitq_model* model,
                              const double* warm_start, fitq_estimate* out);

/* Z statistic at the given (epsilon, lambda_star); 0 for infinite estimates. */
FITQ_API fitq_status fitq_test_statistic(const fitq_history* history, const fitq_model* model,
                                         fitq_estimate estimate, double epsilon,
                                         double lambda_star, double* out);

FITQ_API fitq_status fitq_bernoulli_kl(double p, double q, double* out);

/* ---- experiments ---------------------------------------------------------- */

typedef enum fitq_setting {
  FITQ_FIXED_BUDGET = 0,
  FITQ_FIXED_CONFIDENCE = 1
} fitq_setting;

typedef struct fitq_experiment_desc {
  const char* model;  /* "logistic", "algebraic-4", ... */
  const char* policy; /* "fitq", "static:<x0>", "static:xstar", "uniform:<lo>:<hi>", "rm" */
  fitq_setting setting;
  int64_t horizon;   /* FB budget T */
  double delta;      /* FC confidence */
  int64_t max_steps; /* FC safety cap */
  double theta_star;
  double epsilon;
  double x_lo;
  double x_hi;
  double theta0;
  double rm_start;
  int64_t reps;
  uint64_t master_seed;
  int32_t check_every;
} fitq_experiment_desc;

/* Fills the defaults: logistic, fitq, FB with T = 200, delta = 0.05,
 * max_steps = 1e7, theta_star = 0, epsilon = 0.2, bounds [-2, 2],
 * theta0 = rm_start = 0, reps = 1, seed 0, check_every = 1. */
FITQ_API void fitq_experiment_desc_init(fitq_experiment_desc* desc);

typedef struct fitq_experiment fitq_experiment;

FITQ_API fitq_status fitq_experiment_create(const fitq_experiment_desc* desc,
                                            fitq_experiment** out);
FITQ_API void fitq_experiment_destroy(fitq_experiment* experiment);

/* lambda_star of a fixed-confidence experiment (FITQ_ERR_PRECONDITION for FB). */
FITQ_API fitq_status fitq_experiment_lambda_star(const fitq_experiment* experiment,
                                                 double* out);

typedef struct fitq_replication {
  fitq_estimate final_estimate;
  int64_t steps;
  int failed;
  int hit_cap;
} fitq_replication;

FITQ_API fitq_status fitq_experiment_replicate(const fitq_experiment* experiment,
                                               uint64_t rep_index, fitq_replication* out);

typedef struct fitq_aggregate {
  int64_t reps;
  int64_t failures;
  int64_t cap_hits;
  uint64_t sum_steps;
  double failure_rate;
  double se_failure;
  double mean_tau;
  double se_tau;
} fitq_aggregate;

/* workers = 0 uses the hardware concurrency. */
FITQ_API fitq_status fitq_experiment_run(const fitq_experiment* experiment, unsigned workers,
                                         fitq_aggregate* out);

/* Writes the per-step trace (t,x,y,theta_hat) of one replication as CSV. */
FITQ_API fitq_status fitq_experiment_write_trace(const fitq_experiment* experiment,
                                                 uint64_t rep_index, const char* path);

/* Ordinary least squares over n points. */
FITQ_API fitq_status fitq_slope_fit(const double* xs, const double* ys, size_t n,
                                    double* slope, double* intercept);

#ifdef __cplusplus
}
#endif

#endif /* FITQ_FITQ_H */
