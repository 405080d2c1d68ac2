#ifndef OBLIVION_H
#define OBLIVION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ObvFormat {
  OBV_FORMAT_TABLE = 0,
  OBV_FORMAT_CSV = 1,
  OBV_FORMAT_JSONL = 2,
} ObvFormat;

/**
 * Outcome of an FFI call.
 */
typedef enum ObvStatus {
  OBV_STATUS_OK = 0,
  OBV_STATUS_NULL_POINTER = 1,
  OBV_STATUS_INVALID_UTF8 = 2,
  OBV_STATUS_UNKNOWN_SCENARIO = 3,
  OBV_STATUS_PARSE_ERROR = 4,
  OBV_STATUS_EVAL_ERROR = 5,
  OBV_STATUS_NOT_FOUND = 6,
  OBV_STATUS_INVALID_ARGUMENT = 7,
  OBV_STATUS_PANIC = 8,
} ObvStatus;

/**
 * Opaque scenario result.
 */
typedef struct ObvResult ObvResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *obv_last_error(void);

/**
 * Library version as a static string.
 */
const char *obv_version(void);

size_t obv_scenario_count(void);

/**
 * Id of built-in scenario `index` as a static string, or null when out of range.
 */
const char *obv_scenario_id(size_t index);

/**
 * Runs built-in scenario `id`. `trials` matters only for Monte Carlo
 * scenarios and must be at least 1.
 *
 * # Safety
 * `id` is a nul-terminated string; `out` points to writable storage.
 */
enum ObvStatus obv_run_builtin(const char *id,
                               uint64_t trials,
                               uint64_t seed,
                               struct ObvResult **out);

/**
 * Parses and evaluates a `.scn` description held in `source`.
 *
 * # Safety
 * `source` and `name` are nul-terminated strings; `out` points to writable storage.
 */
enum ObvStatus obv_run_source(const char *source, const char *name, struct ObvResult **out);

/**
 * Canonical text of a `.scn` description.
 *
 * # Safety
 * `source` is a nul-terminated string; `out` points to writable storage.
 */
enum ObvStatus obv_render_source(const char *source, char **out);

/**
 * Weak value `name` as real and imaginary parts.
 *
 * # Safety
 * `result` is a live handle; `name` a nul-terminated string; `re` and `im` writable.
 */
enum ObvStatus obv_result_weak_value(const struct ObvResult *result,
                                     const char *name,
                                     double *re,
                                     double *im);

/**
 * Probability `name`, including `.complement` and `.cumulative` entries.
 *
 * # Safety
 * `result` is a live handle; `name` a nul-terminated string; `out` writable.
 */
enum ObvStatus obv_result_probability(const struct ObvResult *result,
                                      const char *name,
                                      double *out);

/**
 * Monte Carlo or pointer statistic `name`.
 *
 * # Safety
 * `result` is a live handle; `name` a nul-terminated string; `out` writable.
 */
enum ObvStatus obv_result_trial_stat(const struct ObvResult *result, const char *name, double *out);

/**
 * Schmidt rank across the first factor at `epoch` (`t0`, `t1`, `t2`, `final`).
 *
 * # Safety
 * `result` is a live handle; `epoch` a nul-terminated string; `out` writable.
 */
enum ObvStatus obv_result_schmidt_rank(const struct ObvResult *result,
                                       const char *epoch,
                                       size_t *out);

/**
 * Renders the result in `format` with `seed` in the header.
 *
 * # Safety
 * `result` is a live handle; `out` points to writable storage.
 */
enum ObvStatus obv_result_emit(const struct ObvResult *result,
                               enum ObvFormat format,
                               uint64_t seed,
                               char **out);

/**
 * # Safety
 * `result` is null or a handle from this library not yet freed.
 */
void obv_result_free(struct ObvResult *result);

/**
 * # Safety
 * `s` is null or a string returned through an out-parameter of this library.
 */
void obv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OBLIVION_H */
