#ifndef POLARFACT_H
#define POLARFACT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PfClassification {
  PF_CLASSIFICATION_FACTORISATION = 0,
  PF_CLASSIFICATION_INCLUSION_ONLY = 1,
} PfClassification;

typedef enum PfStatus {
  PF_STATUS_OK = 0,
  PF_STATUS_NULL_POINTER = 1,
  PF_STATUS_INVALID_INPUT = 2,
  PF_STATUS_DIMENSION_MISMATCH = 3,
  PF_STATUS_UNEQUAL_MASS = 4,
  PF_STATUS_NUMERICAL_FAILURE = 5,
  PF_STATUS_INCLUSION_NOT_CERTIFIED = 6,
  PF_STATUS_UNKNOWN_GALLERY_NAME = 7,
  PF_STATUS_BUFFER_TOO_SMALL = 8,
  PF_STATUS_NOT_AVAILABLE = 9,
  PF_STATUS_PANIC = 10,
} PfStatus;

/**
 * Opaque sampled map.
 */
typedef struct PfMap PfMap;

/**
 * Opaque weighted point set.
 */
typedef struct PfMeasure PfMeasure;

/**
 * Opaque output of [`pf_polar_factorize`].
 */
typedef struct PfPolarResult PfPolarResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `cap`). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t pf_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pf_version(void);

/**
 * Creates a measure of `n` points. With `dim == 0` the space is abstract and
 * `coords` is ignored (labels "x0", "x1", ...); otherwise `coords` holds
 * `n * dim` row-major values (labels "0", "1", ...).
 *
 * # Safety
 * `coords` (when `dim > 0`) and `weights` must be valid for the stated
 * lengths; `out` must be writable.
 */
enum PfStatus pf_measure_new(const double *coords,
                             const double *weights,
                             size_t n,
                             size_t dim,
                             struct PfMeasure **out);

/**
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void pf_measure_free(struct PfMeasure *m);

/**
 * Number of points, 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t pf_measure_len(const struct PfMeasure *m);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
double pf_measure_total_mass(const struct PfMeasure *m);

/**
 * Creates a map on a copy of `domain` with `n * dim` row-major values.
 *
 * # Safety
 * `domain` must be a live handle, `values` valid for `n * dim` doubles and
 * `out` writable.
 */
enum PfStatus pf_map_new(const struct PfMeasure *domain,
                         const double *values,
                         size_t n,
                         size_t dim,
                         struct PfMap **out);

/**
 * # Safety
 * `m` must be null or a handle from this library not yet freed.
 */
void pf_map_free(struct PfMap *m);

/**
 * # Safety
 * `m` must be null or a live handle.
 */
size_t pf_map_len(const struct PfMap *m);

/**
 * Builds a named gallery instance; both handles are owned by the caller.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `u_out` and `y_out` writable.
 */
enum PfStatus pf_gallery_instance(const char *name,
                                  size_t grid,
                                  uint64_t seed,
                                  struct PfMap **u_out,
                                  struct PfMeasure **y_out);

/**
 * Polar factorisation / inclusion of `u` through `y`.
 *
 * # Safety
 * `u` and `y` must be live handles; `out` writable.
 */
enum PfStatus pf_polar_factorize(const struct PfMap *u,
                                 const struct PfMeasure *y,
                                 double tol,
                                 struct PfPolarResult **out);

/**
 * # Safety
 * `r` must be null or a handle from this library not yet freed.
 */
void pf_result_free(struct PfPolarResult *r);

/**
 * # Safety
 * `r` must be a live handle.
 */
enum PfClassification pf_result_classification(const struct PfPolarResult *r);

/**
 * Largest Fenchel gap on the plan's support; NaN for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double pf_result_max_gap(const struct PfPolarResult *r);

/**
 * Transport cost I of the optimal plan; NaN for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double pf_result_objective(const struct PfPolarResult *r);

/**
 * # Safety
 * `r` must be null or a live handle.
 */
double pf_result_relative_gap(const struct PfPolarResult *r);

/**
 * Number of support triplets.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t pf_result_support_len(const struct PfPolarResult *r);

/**
 * Copies the plan's support into three parallel arrays of capacity `cap`.
 *
 * # Safety
 * Each array must be valid for `cap` elements.
 */
enum PfStatus pf_result_triplets(const struct PfPolarResult *r,
                                 size_t *rows,
                                 size_t *cols,
                                 double *mass,
                                 size_t cap);

/**
 * Copies ψ at the target sites.
 *
 * # Safety
 * `out` must be valid for `cap` doubles.
 */
enum PfStatus pf_result_psi(const struct PfPolarResult *r, double *out, size_t cap);

/**
 * Copies the factor map s (target index per domain point). Returns
 * `NotAvailable` for inclusion-only results.
 *
 * # Safety
 * `out` must be valid for `cap` elements.
 */
enum PfStatus pf_result_factor_map(const struct PfPolarResult *r, size_t *out, size_t cap);

/**
 * Writes the JSON report into `buf` (NUL terminated) and its length,
 * without the terminator, into `len`. Call with `cap = 0` to query the size.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes; `len` writable.
 */
enum PfStatus pf_result_to_json(const struct PfPolarResult *r, char *buf, size_t cap, size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLARFACT_H */
