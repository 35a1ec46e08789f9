/*
 * covsteer: chance-constrained covariance steering for discrete-time
 * linear time-varying stochastic systems.
 *
 * C interface. All objects are opaque handles owned by the caller and
 * released with the matching *_destroy function. Every function returns a
 * cs_status_t; on failure a human-readable message for the calling thread
 * is available from cs_last_error_message().
 */
#ifndef COVSTEER_COVSTEER_H_
#define COVSTEER_COVSTEER_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CS_EXPORT __declspec(dllexport)
#else
#define CS_EXPORT __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cs_status_t {
  CS_OK = 0,
  CS_ERR_DIMENSION_MISMATCH = 1,
  CS_ERR_NOT_PSD = 2,
  CS_ERR_NOT_PD = 3,
  CS_ERR_RISK_BUDGET_EXCEEDED = 4,
  CS_ERR_NOT_CONTROLLABLE = 5,
  CS_ERR_RISK_TOO_LARGE = 6,
  CS_ERR_INVALID_CONSTRAINT = 7,
  CS_ERR_DOMAIN = 8,
  CS_ERR_SQRT_FAILURE = 9,
  CS_ERR_SINGULAR_TERMINAL_MAP = 10,
  CS_ERR_INFEASIBLE = 11,
  CS_ERR_NUMERICAL_FAILURE = 12,
  CS_ERR_PARSE = 13,
  CS_ERR_SCHEMA = 14,
  CS_ERR_VALIDATION = 15,
  CS_ERR_IO = 16,
  CS_ERR_INVALID_ARGUMENT = 17,
  CS_ERR_INVALID_HANDLE = 18,
  CS_ERR_UNKNOWN = 99
} cs_status_t;

typedef enum cs_mode_t {
  CS_MODE_MEAN_ONLY = 0,
  CS_MODE_COV = 1,
  CS_MODE_CHANCE = 2
} cs_mode_t;

typedef enum cs_solve_status_t {
  CS_SOLVE_OPTIMAL = 0,
  CS_SOLVE_INFEASIBLE = 1,
  CS_SOLVE_NUMERICAL_FAILURE = 2
} cs_solve_status_t;

/* A parsed scenario: problem data plus solver/simulation/output options. */
typedef struct cs_scenario_s* cs_scenario_t;
/* Output of one pipeline run (one controller mode). */
typedef struct cs_result_s* cs_result_t;

CS_EXPORT const char* cs_version(void);
CS_EXPORT const char* cs_status_name(cs_status_t status);
CS_EXPORT const char* cs_last_error_message(void);

CS_EXPORT cs_status_t cs_scenario_load(const char* path, cs_scenario_t* out);
CS_EXPORT cs_status_t cs_scenario_parse(const char* text, cs_scenario_t* out);
CS_EXPORT cs_status_t cs_scenario_destroy(cs_scenario_t* scenario);

/* Dimension queries. */
CS_EXPORT cs_status_t cs_scenario_dims(cs_scenario_t scenario, int* horizon,
                                       int* nx, int* nu, int* nw);

/*
 * Runs every validation check. On return *n_issues holds the number of
 * violated invariants; the diagnostics are formatted one per line into
 * buf (truncated to buf_len, always NUL terminated when buf_len > 0).
 * Returns CS_OK even when issues are found.
 */
CS_EXPORT cs_status_t cs_scenario_validate(cs_scenario_t scenario, size_t* n_issues,
                                           char* buf, size_t buf_len);

/* Overrides applied on top of the scenario file. Negative / zero = keep. */
CS_EXPORT cs_status_t cs_scenario_set_samples(cs_scenario_t scenario, int64_t samples);
CS_EXPORT cs_status_t cs_scenario_set_seed(cs_scenario_t scenario, uint64_t seed);
CS_EXPORT cs_status_t cs_scenario_set_tolerance(cs_scenario_t scenario, double tol);
CS_EXPORT cs_status_t cs_scenario_set_output_dir(cs_scenario_t scenario, const char* dir);
CS_EXPORT cs_status_t cs_scenario_output_dir(cs_scenario_t scenario, char* buf, size_t buf_len);

/*
 * Solves one controller mode and, when simulate != 0, validates the policy
 * by Monte-Carlo. An infeasible program is not a call failure: the result
 * is returned with solve status CS_SOLVE_INFEASIBLE.
 */
CS_EXPORT cs_status_t cs_run(cs_scenario_t scenario, cs_mode_t mode, int simulate,
                             cs_result_t* out);
CS_EXPORT cs_status_t cs_result_destroy(cs_result_t* result);

CS_EXPORT cs_status_t cs_result_solve_status(cs_result_t result, cs_solve_status_t* status);
CS_EXPORT cs_status_t cs_result_cost(cs_result_t result, double* cost);
/* 1 when the policy passed every deterministic and Monte-Carlo check. */
CS_EXPORT cs_status_t cs_result_checks_passed(cs_result_t result, int* passed);
CS_EXPORT cs_status_t cs_result_max_row_residual(cs_result_t result, double* residual,
                                                 int* row);
CS_EXPORT cs_status_t cs_result_terminal_cov_slack(cs_result_t result, double* slack);
CS_EXPORT cs_status_t cs_result_union_violation(cs_result_t result, double* frequency);
/* Writes a JSON summary into buf; *needed receives the full length + 1. */
CS_EXPORT cs_status_t cs_result_summary_json(cs_result_t result, char* buf, size_t buf_len,
                                             size_t* needed);
/* Writes the CSV tables and summary.json into dir/<mode>/. */
CS_EXPORT cs_status_t cs_result_emit(cs_result_t result, const char* dir);

/* Writes the assembled conic program of the given mode in sparse text form. */
CS_EXPORT cs_status_t cs_dump_program(cs_scenario_t scenario, cs_mode_t mode, const char* path);

#ifdef __cplusplus
}
#endif

#endif  // COVSTEER_COVSTEER_H_
