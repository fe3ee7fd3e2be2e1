/*
 * deltalab.h - C interface to the verification toolkit.
 *
 * Usage pattern:
 *
 *   dl_context* ctx = dl_context_create();
 *   char* report = NULL;
 *   int rc = dl_run_delta(ctx, "{\"q_min\":5,\"q_max\":97}", &report);
 *   ...
 *   dl_string_free(report);
 *   dl_context_destroy(ctx);
 *
 * Every runner consumes a JSON configuration string and produces a JSON
 * report.  The report is allocated on DL_OK and DL_CHECK_FAILED and must be
 * released with dl_string_free; on the other codes *report_json is set to
 * NULL and dl_last_error() describes the problem.  Runs with equal
 * configurations produce byte-identical reports.
 */
#ifndef DELTALAB_H
#define DELTALAB_H

#ifdef __cplusplus
extern "C" {
#endif

/* All checks ran and passed. */
#define DL_OK 0
/* The run completed but at least one verification failed; the report
 * carries the failing records. */
#define DL_CHECK_FAILED 1
/* Malformed or out-of-domain configuration. */
#define DL_EINVAL 2
/* A referenced file is missing or unreadable. */
#define DL_EIO 3
/* Internal failure. */
#define DL_ERROR 4

typedef struct dl_context dl_context;

dl_context* dl_context_create(void);
void dl_context_destroy(dl_context* ctx);

/* Message for the most recent failing call on this context; empty string
 * when the last call succeeded.  Storage is owned by the context. */
const char* dl_last_error(const dl_context* ctx);

/* Static version string. */
const char* dl_version(void);

/* Releases a report string handed out by a runner. */
void dl_string_free(char* s);

/*
 * Runners.  Common optional config fields:
 *   "threads": int     worker cap for parallel reductions (results do not
 *                      depend on it); mirrors the DELTA_LAB_THREADS
 *                      environment variable
 *   "coeffs":  string  "eta11" (built-in level-11 table, the default) or a
 *                      coefficient file path
 *   "horizon": int     coefficient table length when "coeffs" is "eta11"
 *
 * dl_run_charsum   {"q":7,"mode":"exhaustive"} or
 *                  {"q":101,"mode":"sample","samples":100000,"seed":1}
 *                  closed-form branches of the correlation sum against brute
 *                  force, generic branch against the square-root bound.
 * dl_run_delta     {"q_min":5,"q_max":997} congruence detection identity
 *                  max error per prime modulus.
 * dl_run_poisson   {"q":11,"chi_index":1,"cases":[{"alpha":1,"ell":1,"c":7,
 *                  "N":40.0},...]} dual-route summation checks; omitted
 *                  cases run a deterministic 50-case sweep
 *                  ({"sweep":50,"seed":1}).
 * dl_run_voronoi   {"cases":[{"alpha":1,"c":1,"dilation":3240.0},...]}
 *                  coefficient-sum reflection checks; the first case fits
 *                  the dual constant, later cases reuse it.  Omitted cases
 *                  run the canonical four-modulus set.
 * dl_run_pipeline  {"q":11,"N":40.0,"L":[3,7],"P":[1427,1429],"amp":2,...}
 *                  the full moment chain; omitted parameters are filled by
 *                  the planner and recorded in the report.
 * dl_run_census    {"q":101,"family":"equal-rigidity","L":[5,7],"P":[2,3],
 *                  "R":3,"M":100} congruence-system enumeration.
 * dl_run_lvalue    {"q":11,"chi_index":"all"} two-scale central values.
 * dl_run_lstudy    {"levels":["data/11.tbl",...]} exponent study; the
 *                  report embeds the CSV table.
 */
int dl_run_charsum(dl_context* ctx, const char* config_json, char** report_json);
int dl_run_delta(dl_context* ctx, const char* config_json, char** report_json);
int dl_run_poisson(dl_context* ctx, const char* config_json, char** report_json);
int dl_run_voronoi(dl_context* ctx, const char* config_json, char** report_json);
int dl_run_pipeline(dl_context* ctx, const char* config_json, char** report_json);
int dl_run_census(dl_context* ctx, const char* config_json, char** report_json);
int dl_run_lvalue(dl_context* ctx, const char* config_json, char** report_json);
int dl_run_lstudy(dl_context* ctx, const char* config_json, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* DELTALAB_H */
