#ifndef UGINT_H
#define UGINT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum UgStatus {
  /**
   * Success.
   */
  UG_OK = 0,
  /**
   * Invalid argument (shape mismatch, non-finite entry, null pointer).
   */
  UG_ERR_INPUT = 1,
  /**
   * Numerical failure (overflow or domain bound exceeded).
   */
  UG_ERR_NUMERICAL = 2,
} UgStatus;

/**
 * Opaque matrix handle; create with `ug_matrix_new`, release with
 * `ug_matrix_free`.
 */
typedef struct UgMatrix UgMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ug_last_error(void);

/**
 * Create a rows x cols matrix from `2 * rows * cols` doubles laid out
 * row-major as re, im pairs. Returns null on invalid input (consult
 * `ug_last_error`).
 *
 * # Safety
 * `interleaved` must point to at least `2 * rows * cols` readable
 * doubles.
 */
struct UgMatrix *ug_matrix_new(size_t rows, size_t cols, const double *interleaved);

/**
 * Release a handle returned by `ug_matrix_new`. Null is a no-op.
 *
 * # Safety
 * `m` must be null or a pointer previously returned by
 * `ug_matrix_new` that has not been freed.
 */
void ug_matrix_free(struct UgMatrix *m);

/**
 * Integral of det^nu(U) exp(tr(AU + BU*)/2) over Haar-distributed U(N).
 *
 * # Safety
 * Matrix handles must be valid; `out_re`/`out_im` must be writable.
 */
enum UgStatus ug_eval_i1(const struct UgMatrix *a,
                         const struct UgMatrix *b,
                         uint32_t nu,
                         double *out_re,
                         double *out_im);

/**
 * Integral of det^nu(UV) exp(tr(UAVB + CV*DU*)/2) over two independent
 * Haar factors on U(N).
 *
 * # Safety
 * As `ug_eval_i1`.
 */
enum UgStatus ug_eval_i2(const struct UgMatrix *a,
                         const struct UgMatrix *b,
                         const struct UgMatrix *c,
                         const struct UgMatrix *d,
                         uint32_t nu,
                         double *out_re,
                         double *out_im);

/**
 * Conjectured rectangular analogue: U over U(N), V over U(M), M < N;
 * a and c are N x M, b and d are M x N.
 *
 * # Safety
 * As `ug_eval_i1`.
 */
enum UgStatus ug_eval_i2_rect(const struct UgMatrix *a,
                              const struct UgMatrix *b,
                              const struct UgMatrix *c,
                              const struct UgMatrix *d,
                              double *out_re,
                              double *out_im);

/**
 * Integral of exp(tr(AUBU*)) over Haar-distributed U(N).
 *
 * # Safety
 * As `ug_eval_i1`.
 */
enum UgStatus ug_eval_i3(const struct UgMatrix *a,
                         const struct UgMatrix *b,
                         double *out_re,
                         double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UGINT_H */
