#ifndef DYNSCAT_H
#define DYNSCAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  DYNSCAT_STATUS_OK = 0,
  DYNSCAT_STATUS_NULL_POINTER = 1,
  DYNSCAT_STATUS_INVALID_UTF8 = 2,
  DYNSCAT_STATUS_PARSE = 3,
  DYNSCAT_STATUS_INVALID_INPUT = 4,
  DYNSCAT_STATUS_CONFIG = 5,
  DYNSCAT_STATUS_INTEGRATION = 6,
  DYNSCAT_STATUS_ZERO_WAVENUMBER = 7,
  DYNSCAT_STATUS_SPECTRAL_SINGULARITY = 8,
  DYNSCAT_STATUS_HALF_LINE_SINGULARITY = 9,
  DYNSCAT_STATUS_CONTRADICTION = 10,
  DYNSCAT_STATUS_UNSUPPORTED = 11,
  DYNSCAT_STATUS_IO = 12,
  DYNSCAT_STATUS_PANIC = 13,
  DYNSCAT_STATUS_INTERNAL = 14,
} DynscatStatus;

/**
 * Opaque: a parsed potential, its support window and the settings in use.
 */
typedef struct DynscatProblem DynscatProblem;

typedef struct {
  double rtol;
  double atol;
  size_t mesh_intervals;
  double tau;
  double eps_tail;
  uint32_t max_order;
} DynscatSettings;

typedef struct {
  double re;
  double im;
} DynscatComplex;

/**
 * Row-major 2x2 complex matrix.
 */
typedef struct {
  DynscatComplex m11;
  DynscatComplex m12;
  DynscatComplex m21;
  DynscatComplex m22;
} DynscatMatrix;

typedef struct {
  DynscatComplex rl;
  DynscatComplex rr;
  DynscatComplex t;
} DynscatAmplitudes;

typedef struct {
  DynscatComplex a1;
  DynscatComplex a2;
  DynscatComplex b1;
  DynscatComplex b2;
  DynscatComplex g1;
  double ell;
  /**
   * 1 when `b1` is below the resonance threshold.
   */
  int32_t resonant;
  double margin;
} DynscatCoefficients;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library defaults.
 */
DynscatSettings dynscat_settings_default(void);

/**
 * Parses a JSON potential. `settings` may be null for the defaults.
 * The handle must be released with [`dynscat_problem_free`].
 *
 * # Safety
 * `json` must be a NUL-terminated string; `settings` null or valid; `out` valid for writes.
 */
DynscatStatus dynscat_problem_new(const char *json,
                                  const DynscatSettings *settings,
                                  DynscatProblem **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `problem` must come from [`dynscat_problem_new`] and not be freed twice.
 */
void dynscat_problem_free(DynscatProblem *problem);

/**
 * Support window `[x_minus, x_plus]` used for the computation.
 *
 * # Safety
 * `problem` must be a live handle; `x_minus` and `x_plus` valid for writes.
 */
DynscatStatus dynscat_problem_window(const DynscatProblem *problem,
                                     double *x_minus,
                                     double *x_plus);

/**
 * Transfer matrix `M(k)`.
 *
 * # Safety
 * `problem` must be a live handle; `out` valid for writes.
 */
DynscatStatus dynscat_transfer_matrix(const DynscatProblem *problem,
                                      DynscatComplex k,
                                      DynscatMatrix *out);

/**
 * Left/right reflection and transmission amplitudes at `k`.
 *
 * # Safety
 * `problem` must be a live handle; `out` valid for writes.
 */
DynscatStatus dynscat_amplitudes(const DynscatProblem *problem,
                                 DynscatComplex k,
                                 DynscatAmplitudes *out);

/**
 * Zero-energy coefficients and the resonance verdict.
 *
 * # Safety
 * `problem` must be a live handle; `out` valid for writes.
 */
DynscatStatus dynscat_zero_energy(const DynscatProblem *problem, DynscatCoefficients *out);

/**
 * Half-line reflection amplitude for `alpha psi(0) + beta psi'(0)/k = 0`.
 *
 * # Safety
 * `problem` must be a live handle; `out` valid for writes.
 */
DynscatStatus dynscat_halfline_reflection(const DynscatProblem *problem,
                                          DynscatComplex alpha,
                                          DynscatComplex beta,
                                          DynscatComplex k,
                                          DynscatComplex *out);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t dynscat_last_error(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYNSCAT_H */
