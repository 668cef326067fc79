#ifndef SIMGROUP_H
#define SIMGROUP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every entry point.
 */
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  SG_STATUS_NULL_POINTER = 1,
  /**
   * Malformed arguments: bad dimension, non-finite entries, index out of range.
   */
  SG_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The requested quantity is not available (for example a weight of an unbounded verdict).
   */
  SG_STATUS_UNAVAILABLE = 3,
  /**
   * A numerical kernel failed (non-convergence, near-singular data, saturation).
   */
  SG_STATUS_NUMERICAL = 4,
  /**
   * A precondition of the computation does not hold.
   */
  SG_STATUS_PRECONDITION = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  SG_STATUS_PANIC = 6,
} SgStatus;

/**
 * Outcome class of a similarity verdict.
 */
typedef enum SgVerdictStatus {
  SG_VERDICT_STATUS_FINITE = 0,
  /**
   * No weight was found up to `kappa_max`.
   */
  SG_VERDICT_STATUS_INFEASIBLE = 1,
  /**
   * Spectral obstruction: no similarity constant exists.
   */
  SG_VERDICT_STATUS_UNBOUNDED = 2,
} SgVerdictStatus;

/**
 * Opaque square complex matrix.
 */
typedef struct SgMatrix SgMatrix;

/**
 * Opaque similarity verdict.
 */
typedef struct SgVerdict SgVerdict;

/**
 * Solver tolerances; obtain defaults from [`sg_options_default`].
 */
typedef struct SgOptions {
  double feas_tol;
  double rel_tol;
  double kappa_max;
  size_t max_iter;
  double kappa_slack;
} SgOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default solver options.
 */
struct SgOptions sg_options_default(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sg_version(void);

/**
 * Message of the last failed call on this thread, or null if there was none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *sg_last_error_message(void);

/**
 * Creates an `n×n` matrix from row-major real and (optional) imaginary parts.
 *
 * # Safety
 * `re` must point to `n*n` readable doubles; `im` is null or points to `n*n`
 * readable doubles; `out` must be a valid pointer to writable storage.
 */
enum SgStatus sg_matrix_new(size_t n, const double *re, const double *im, struct SgMatrix **out);

/**
 * Releases a matrix; null is ignored.
 *
 * # Safety
 * `m` must be null or a handle from this library that was not freed yet.
 */
void sg_matrix_free(struct SgMatrix *m);

/**
 * Dimension of a matrix, 0 for null.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t sg_matrix_dim(const struct SgMatrix *m);

/**
 * Reads entry `(i, j)`; either output pointer may be null.
 *
 * # Safety
 * `m` must be a live handle; `re` and `im` are null or writable.
 */
enum SgStatus sg_matrix_get(const struct SgMatrix *m, size_t i, size_t j, double *re, double *im);

/**
 * Similarity constant `C(T)` of a single operator.
 *
 * `opts` may be null for defaults. An unbounded or infeasible outcome is a
 * successful call; inspect it with [`sg_verdict_status`].
 *
 * # Safety
 * `t` must be a live handle, `opts` null or valid, `out` writable.
 */
enum SgStatus sg_discrete_constant(const struct SgMatrix *t,
                                   const struct SgOptions *opts,
                                   struct SgVerdict **out);

/**
 * Joint constant of the semigroup generated by `a`.
 *
 * # Safety
 * As for [`sg_discrete_constant`].
 */
enum SgStatus sg_joint_constant(const struct SgMatrix *a,
                                const struct SgOptions *opts,
                                struct SgVerdict **out);

/**
 * Constant of the rescaled semigroup `e^{-shift·t} e^{tA}`.
 *
 * # Safety
 * As for [`sg_discrete_constant`].
 */
enum SgStatus sg_quasi_constant(const struct SgMatrix *a,
                                double shift,
                                const struct SgOptions *opts,
                                struct SgVerdict **out);

/**
 * Releases a verdict; null is ignored.
 *
 * # Safety
 * `v` must be null or a handle from this library that was not freed yet.
 */
void sg_verdict_free(struct SgVerdict *v);

/**
 * Outcome class; null handles read as `Infeasible`.
 *
 * # Safety
 * `v` must be null or a live handle.
 */
enum SgVerdictStatus sg_verdict_status(const struct SgVerdict *v);

/**
 * The constant (`+inf` unless finite); NaN for a null handle.
 *
 * # Safety
 * `v` must be null or a live handle.
 */
double sg_verdict_constant(const struct SgVerdict *v);

/**
 * Certified lower bound; NaN for a null handle.
 *
 * # Safety
 * `v` must be null or a live handle.
 */
double sg_verdict_lower_bound(const struct SgVerdict *v);

/**
 * Worst constraint violation of the certificate; NaN when there is none.
 *
 * # Safety
 * `v` must be null or a live handle.
 */
double sg_verdict_residual(const struct SgVerdict *v);

/**
 * Copies the certificate weight `P` (normalised to `λmin(P) = 1`) into a new matrix.
 *
 * Returns [`SgStatus::Unavailable`] when the verdict carries no certificate.
 *
 * # Safety
 * `v` must be a live handle and `out` writable.
 */
enum SgStatus sg_verdict_weight(const struct SgVerdict *v, struct SgMatrix **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMGROUP_H */
