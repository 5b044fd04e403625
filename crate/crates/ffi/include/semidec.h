#ifndef SEMIDEC_H
#define SEMIDEC_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SdStatus {
  SD_STATUS_OK = 0,
  SD_STATUS_NULL_POINTER = 1,
  SD_STATUS_INVALID_UTF8 = 2,
  SD_STATUS_INPUT_ERROR = 3,
  SD_STATUS_BUDGET_EXCEEDED = 4,
  SD_STATUS_INTERNAL_ERROR = 5,
  SD_STATUS_PANIC = 6,
} SdStatus;

typedef struct SdDeltaReport SdDeltaReport;

typedef struct SdFamily SdFamily;

typedef struct SdPoly SdPoly;

typedef struct SdVariety SdVariety;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *sd_last_error_message(void);

void sd_string_free(char *s);

/**
 * Parses a nonzero homogeneous form in `x0 .. x{num_vars-1}`.
 */
enum SdStatus sd_poly_parse(const char *text, size_t num_vars, struct SdPoly **out);

void sd_poly_free(struct SdPoly *p);

enum SdStatus sd_poly_to_string(const struct SdPoly *p, char **out);

enum SdStatus sd_poly_degree(const struct SdPoly *p, uint32_t *out);

enum SdStatus sd_family_new(size_t num_vars, struct SdFamily **out);

/**
 * Appends a member parsed from `text`.
 */
enum SdStatus sd_family_push(struct SdFamily *f, const char *text);

enum SdStatus sd_family_len(const struct SdFamily *f, size_t *out);

void sd_family_free(struct SdFamily *f);

/**
 * The variety cut out by `count` forms; `count == 0` gives projective space.
 */
enum SdStatus sd_variety_new(size_t num_vars,
                             const char *const *forms,
                             size_t count,
                             struct SdVariety **out);

/**
 * Projective dimension, or -1 for the empty variety.
 */
enum SdStatus sd_variety_dim(const struct SdVariety *v, int64_t *out);

void sd_variety_free(struct SdVariety *v);

/**
 * Distributive constant of `family` with respect to `variety` (NULL means
 * projective space).
 */
enum SdStatus sd_delta_compute(const struct SdFamily *family,
                               const struct SdVariety *variety,
                               bool prune,
                               struct SdDeltaReport **out);

/**
 * `"p/q"` or `"inf"`.
 */
enum SdStatus sd_delta_report_delta(const struct SdDeltaReport *r, char **out);

enum SdStatus sd_delta_report_json(const struct SdDeltaReport *r, char **out);

void sd_delta_report_free(struct SdDeltaReport *r);

/**
 * S-height of a point such as `"(6,4)"`, with `S = {∞} ∪ primes`, as `"p/q"`.
 */
enum SdStatus sd_s_height(const char *point, const uint64_t *primes, size_t nprimes, char **out);

/**
 * Runs a CLI command (`"delta"`, `"search"`, ...) on a JSON spec and returns
 * the JSON payload. `budget == 0` keeps the default limits.
 */
enum SdStatus sd_run_spec(const char *verb, const char *spec_json, uint64_t budget, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMIDEC_H */
