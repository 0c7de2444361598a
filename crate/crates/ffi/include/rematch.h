/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef REMATCH_H
#define REMATCH_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum {
  RM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RM_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RM_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed instance, unknown name or parameter out of range.
   */
  RM_STATUS_INVALID_ARGUMENT = 3,
  /**
   * An enumeration, DP or matching size limit was exceeded.
   */
  RM_STATUS_LIMIT_EXCEEDED = 4,
  /**
   * The operation does not apply to this instance.
   */
  RM_STATUS_UNSUPPORTED = 5,
  RM_STATUS_NUMERICAL = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  RM_STATUS_PANIC = 7,
} RmStatus;

typedef enum {
  RM_LP_VARIANT_SM = 0,
  RM_LP_VARIANT_GREEDY_COMMIT = 1,
} RmLpVariant;

/**
 * Opaque instance handle.
 */
typedef struct RmInstance RmInstance;

/**
 * Summary of a Monte Carlo run. Per-round values are only in the JSON form.
 */
typedef struct {
  uint64_t trials;
  uint64_t seed;
  double mean;
  /**
   * Standard error of the mean.
   */
  double std_error;
} RmRewardStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *rm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rm_version(void);

/**
 * # Safety
 * `s` must be null or a string this library wrote to a `char **`
 * out-parameter, not yet freed.
 */
void rm_string_free(char *s);

/**
 * Parses an instance from its JSON form.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
RmStatus rm_instance_from_json(const char *json, RmInstance **out);

/**
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
RmStatus rm_instance_to_json(const RmInstance *inst, char **out);

/**
 * # Safety
 * `inst` must be null or a handle from this library, not yet freed.
 */
void rm_instance_free(RmInstance *inst);

/**
 * Number of edges, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t rm_instance_edge_count(const RmInstance *inst);

/**
 * Number of rounds, or 0 for a null handle.
 *
 * # Safety
 * `inst` must be null or a live handle.
 */
size_t rm_instance_rounds(const RmInstance *inst);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
RmStatus rm_gen_gneps(size_t n, double eps, RmInstance **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
RmStatus rm_gen_separation(RmInstance **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
RmStatus rm_gen_knn(size_t n, double p, RmInstance **out);

/**
 * `profile` is one of "unit-small", "cap-small", "m2o-small", "hyper3-small".
 *
 * # Safety
 * `profile` must be a valid NUL-terminated string and `out` a valid pointer.
 */
RmStatus rm_gen_random(const char *profile, uint64_t seed, RmInstance **out);

/**
 * Monte Carlo reward of `policy` ("sm", "greedy_commit", "opt_exact", ...).
 *
 * # Safety
 * `inst` must be a live handle, `policy` a valid string, `out` a valid pointer.
 */
RmStatus rm_monte_carlo(const RmInstance *inst,
                        const char *policy,
                        uint64_t trials,
                        uint64_t seed,
                        RmRewardStats *out);

/**
 * Same as [`rm_monte_carlo`] with the full statistics as JSON.
 *
 * # Safety
 * As for [`rm_monte_carlo`]; free the string with [`rm_string_free`].
 */
RmStatus rm_monte_carlo_json(const RmInstance *inst,
                             const char *policy,
                             uint64_t trials,
                             uint64_t seed,
                             char **out);

/**
 * Exact optimal expected reward, optionally restricted to committing policies.
 *
 * # Safety
 * `inst` must be a live handle and `out` a valid pointer.
 */
RmStatus rm_opt_value(const RmInstance *inst, bool commit, double *out);

/**
 * Simplex optimum of the factor-revealing LP at horizon `t`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
RmStatus rm_lp_solve(size_t t, RmLpVariant variant, double *out);

/**
 * Closed-form u(t).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
RmStatus rm_lp_u(size_t t, RmLpVariant variant, double *out);

/**
 * Approximation factor 1/u(t).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
RmStatus rm_lp_factor(size_t t, RmLpVariant variant, double *out);

/**
 * Checks the finite-horizon dual certificate, or the published expressions
 * when `printed` is set.
 *
 * # Safety
 * `feasible` must be a valid pointer.
 */
RmStatus rm_lp_check_dual(size_t t, RmLpVariant variant, bool printed, bool *feasible);

/**
 * Checks one lemma at horizon `t` (0 means every horizon). Exact when
 * `trials` is 0, Monte Carlo otherwise. Writes a JSON array of reports and
 * whether all of them hold.
 *
 * # Safety
 * `inst` must be a live handle, `lemma` a valid string, and `out_json` and
 * `holds` valid pointers.
 */
RmStatus rm_verify_json(const RmInstance *inst,
                        const char *lemma,
                        size_t t,
                        uint64_t trials,
                        uint64_t seed,
                        char **out_json,
                        bool *holds);

/**
 * Runs a named experiment bundle ("lp", "lemmas", ..., or "all") and
 * writes its JSON lines and pass flag.
 *
 * # Safety
 * `bundle` must be a valid string; `out_lines` and `pass` valid pointers.
 */
RmStatus rm_reproduce(const char *bundle, uint64_t seed, char **out_lines, bool *pass);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REMATCH_H */
