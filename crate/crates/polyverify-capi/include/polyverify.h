#ifndef POLYVERIFY_H
#define POLYVERIFY_H

/* Generated by cbindgen from the polyverify-capi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum PvStatusCode {
  PV_OK = 0,
  PV_ERR_PARSE = 1,
  PV_ERR_DIMENSION = 2,
  PV_ERR_DEGENERATE = 3,
  PV_ERR_INVALID_NETWORK = 4,
  PV_ERR_ITERATION_LIMIT = 5,
  PV_ERR_INTERNAL = 6,
  PV_ERR_NULL_ARGUMENT = 7,
  PV_ERR_UTF8 = 8,
} PvStatusCode;

/**
 * Opaque solver context: tolerances plus the LP call counter.
 */
typedef struct PvContext PvContext;

/**
 * Opaque verification problem handle.
 */
typedef struct PvProblem PvProblem;

/**
 * Opaque verdict handle.
 */
typedef struct PvVerdict PvVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message of the current thread; valid until the next failing
 * call on this thread. Never null.
 */
const char *pv_last_error_message(void);

/**
 * New context with default tolerances.
 */
struct PvContext *pv_context_new(void);

/**
 * New context with explicit tolerances (pass a value ≤ 0 to keep a default).
 */
struct PvContext *pv_context_with_tolerances(double eps_zero,
                                             double eps_feas,
                                             double eps_int,
                                             double eps_obj);

/**
 * # Safety
 * `ctx` must be null or a pointer from `pv_context_new`/`pv_context_with_tolerances`.
 */
void pv_context_free(struct PvContext *ctx);

/**
 * Total LPs solved through this context so far.
 *
 * # Safety
 * `ctx` must be null or a valid context handle.
 */
uint64_t pv_context_lp_calls(const struct PvContext *ctx);

/**
 * Parse a problem bundle (network + input/output polytopes) from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PvStatusCode pv_problem_from_json(const struct PvContext *ctx,
                                       const char *json,
                                       struct PvProblem **out);

/**
 * # Safety
 * `problem` must be null or a pointer from `pv_problem_from_json`.
 */
void pv_problem_free(struct PvProblem *problem);

/**
 * Decide the problem. `exhaustive` collects every violation instead of
 * stopping at the first.
 *
 * # Safety
 * All pointers must be valid; `out` receives an owned verdict handle.
 */
enum PvStatusCode pv_verify(const struct PvContext *ctx,
                            const struct PvProblem *problem,
                            bool exhaustive,
                            struct PvVerdict **out);

/**
 * # Safety
 * `verdict` must be null or a pointer from `pv_verify`.
 */
void pv_verdict_free(struct PvVerdict *verdict);

/**
 * True when the network maps the whole input polytope into the output polytope.
 *
 * # Safety
 * `verdict` must be null or a valid verdict handle.
 */
bool pv_verdict_is_sat(const struct PvVerdict *verdict);

/**
 * Dimension of the counterexample point; 0 for SAT verdicts.
 *
 * # Safety
 * `verdict` must be null or a valid verdict handle.
 */
size_t pv_verdict_witness_len(const struct PvVerdict *verdict);

/**
 * Copy the counterexample into `buf` (length `len` ≥ witness length).
 *
 * # Safety
 * `buf` must point to at least `len` writable doubles.
 */
enum PvStatusCode pv_verdict_witness(const struct PvVerdict *verdict, double *buf, size_t len);

/**
 * Violated output-constraint index, or -1 for SAT verdicts.
 *
 * # Safety
 * `verdict` must be null or a valid verdict handle.
 */
int64_t pv_verdict_constraint_index(const struct PvVerdict *verdict);

/**
 * Violation margin at the witness, or NaN for SAT verdicts.
 *
 * # Safety
 * `verdict` must be null or a valid verdict handle.
 */
double pv_verdict_margin(const struct PvVerdict *verdict);

/**
 * # Safety
 * `verdict` must be null or a valid verdict handle.
 */
uint64_t pv_verdict_regions_traversed(const struct PvVerdict *verdict);

/**
 * # Safety
 * `verdict` must be null or a valid verdict handle.
 */
uint64_t pv_verdict_regions_verified(const struct PvVerdict *verdict);

/**
 * # Safety
 * `verdict` must be null or a valid verdict handle.
 */
uint64_t pv_verdict_lp_calls(const struct PvVerdict *verdict);

/**
 * Full verdict report as JSON; free the string with `pv_string_free`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PvStatusCode pv_verdict_report_json(const struct PvVerdict *verdict, char **out);

/**
 * Free a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void pv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLYVERIFY_H */
