#ifndef DAMPED_CHAIN_H
#define DAMPED_CHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DcRegime {
  DC_REGIME_REGULAR = 0,
  DC_REGIME_SINGULAR = 1,
  DC_REGIME_UNSUPPORTED = 2,
} DcRegime;

typedef enum DcStatus {
  DC_STATUS_OK = 0,
  DC_STATUS_NULL_POINTER = 1,
  DC_STATUS_INVALID_INPUT = 2,
  DC_STATUS_DIMENSION_MISMATCH = 3,
  DC_STATUS_SINGULAR = 4,
  DC_STATUS_NOT_CONVERGED = 5,
  DC_STATUS_UNSUPPORTED = 6,
  DC_STATUS_REGIME_MISMATCH = 7,
  DC_STATUS_SPECTRAL = 8,
  DC_STATUS_CONDITION_VIOLATED = 9,
  DC_STATUS_BUFFER_TOO_SMALL = 10,
  DC_STATUS_PANIC = 99,
} DcStatus;

/*
 Opaque row-stochastic matrix.
 */
typedef struct DcMatrix DcMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates a matrix from `dim * dim` row-major entries.

 # Safety
 `data` must point to `dim * dim` readable doubles and `out` must be writable.
 */
enum DcStatus dc_matrix_new(const double *data, size_t dim, struct DcMatrix **out);

/*
 Releases a matrix. Null is ignored.

 # Safety
 `m` must come from this library and must not be used afterwards.
 */
void dc_matrix_free(struct DcMatrix *m);

/*
 Number of states, or 0 for a null handle.

 # Safety
 `m` must be null or a live handle.
 */
size_t dc_matrix_dim(const struct DcMatrix *m);

/*
 Copies the entries row-major into `out`, which holds `len >= dim * dim` doubles.

 # Safety
 `m` must be a live handle and `out` must hold `len` writable doubles.
 */
enum DcStatus dc_matrix_entries(const struct DcMatrix *m, double *out, size_t len);

/*
 Builds P_ε = (1 − ε)P₀ + εD for the damping vector `d` of length `len`.

 # Safety
 `p0` must be a live handle, `d` must hold `len` doubles and `out` must be writable.
 */
enum DcStatus dc_damped_matrix(const struct DcMatrix *p0,
                               const double *d,
                               size_t len,
                               double epsilon,
                               struct DcMatrix **out);

/*
 Stationary law of `p` by a direct linear solve.

 # Safety
 `p` must be a live handle and `out` must hold `len` writable doubles.
 */
enum DcStatus dc_stationary_direct(const struct DcMatrix *p, double *out, size_t len);

/*
 Stationary law of P_ε by the geometric series; `terms` (may be null) receives L.

 # Safety
 `p0` must be a live handle, `d` must hold `len` doubles, `out` must hold
 `len` writable doubles and `terms` must be null or writable.
 */
enum DcStatus dc_stationary_series(const struct DcMatrix *p0,
                                   const double *d,
                                   size_t len,
                                   double epsilon,
                                   double tol,
                                   double *out,
                                   size_t *terms);

/*
 Classifies P₀ as regular, singular or unsupported.

 # Safety
 `p0` must be a live handle and `out` must be writable.
 */
enum DcStatus dc_structure_regime(const struct DcMatrix *p0, enum DcRegime *out);

/*
 Expansion of π_ε up to `order`. Row k of `out` (m values each) holds the
 coefficient of εᵏ, row 0 being the limit π₀; `out_len >= (order + 1) * m`.

 # Safety
 `p0` must be a live handle, `d` must hold `len` doubles and `out` must
 hold `out_len` writable doubles.
 */
enum DcStatus dc_expansion(const struct DcMatrix *p0,
                           const double *d,
                           size_t len,
                           size_t order,
                           double *out,
                           size_t out_len);

/*
 Δ_N(P) = (1 − Q(Pᴺ))^{1/N}.

 # Safety
 `p` must be a live handle and `out` must be writable.
 */
enum DcStatus dc_ergodicity_coefficient(const struct DcMatrix *p, size_t n, double *out);

/*
 Geometric bound on max_j |p_ε,p̄,j(n) − π_ε,j| through 1 − Q(P₀).

 # Safety
 `p0` must be a live handle, `d` and `p` must hold `len` doubles and `out` must be writable.
 */
enum DcStatus dc_bound_theorem5(const struct DcMatrix *p0,
                                const double *d,
                                const double *p,
                                size_t len,
                                double epsilon,
                                size_t n,
                                double *out);

/*
 Mixture limit π(t) = e^{−t}π₀,p̄ + (1 − e^{−t})π₀,d̄; `t` may be +∞.

 # Safety
 `p0` must be a live handle, `d` and `p` must hold `len` doubles and `out`
 must hold `len` writable doubles.
 */
enum DcStatus dc_triangular_limit(const struct DcMatrix *p0,
                                  const double *d,
                                  const double *p,
                                  size_t len,
                                  double t,
                                  double *out);

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *dc_last_error_message(void);

const char *dc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DAMPED_CHAIN_H */
