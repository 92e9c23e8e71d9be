/* C interface to the polarred reduction library. */

#ifndef POLARRED_H
#define POLARRED_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PolarredStatus {
  PolarredStatus_Ok = 0,
  PolarredStatus_NullPointer = 1,
  PolarredStatus_InvalidUtf8 = 2,
  PolarredStatus_BadConfig = 3,
  PolarredStatus_NumericalError = 4,
  PolarredStatus_Panicked = 5,
} PolarredStatus;

/**
 * Opaque handle to a validated polar action model.
 */
typedef struct PolarredModel PolarredModel;

/**
 * Conservation report of an integrated reduced trajectory.
 */
typedef struct PolarredFlowSummary {
  double energy_drift;
  double casimir_drift;
  double max_isotropy_spin;
  /**
   * Time of the alcove-wall hit; only meaningful when hit_wall is 1.
   */
  double wall_time;
  int hit_wall;
} PolarredFlowSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message on this thread into `buf` (truncated,
 * always NUL terminated when `cap > 0`). Returns the full length
 * including the terminator, or 0 when no error is recorded.
 *
 * # Safety
 * `buf` must point to `cap` writable bytes, or be null with `cap` 0.
 */
size_t polarred_last_error(char *buf, size_t cap);

/**
 * Static version string of the underlying library.
 */
const char *polarred_version(void);

/**
 * Builds a catalog model by name (for example "su2-conj"). Returns
 * null on failure; the cause is available via `polarred_last_error`.
 *
 * # Safety
 * `name` must be a NUL-terminated string.
 */
struct PolarredModel *polarred_model_new(const char *name);

/**
 * Releases a model handle. Null is ignored.
 *
 * # Safety
 * `model` must come from `polarred_model_new` and not be used after.
 */
void polarred_model_free(struct PolarredModel *model);

/**
 * Dimension of the section (number of radial coordinates); 0 for null.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
size_t polarred_model_rank(const struct PolarredModel *model);

/**
 * Dimension of the spin space (transverse isotropy complement); 0 for null.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
size_t polarred_model_spin_dim(const struct PolarredModel *model);

/**
 * Radial density delta(q) of the model at the interior point `q`.
 *
 * # Safety
 * `q` must point to `q_len` doubles and `out` to one writable double.
 */
enum PolarredStatus polarred_density(const struct PolarredModel *model,
                                     const double *q,
                                     size_t q_len,
                                     double *out);

/**
 * Scalar measure term of the reduced quantum Hamiltonian at `q`.
 *
 * # Safety
 * `q` must point to `q_len` doubles and `out` to one writable double.
 */
enum PolarredStatus polarred_measure_term(const struct PolarredModel *model,
                                          const double *q,
                                          size_t q_len,
                                          double *out);

/**
 * Lowest `k` eigenvalues of the reduced radial operator on an
 * `grid_n`-point grid, written to `out`.
 *
 * # Safety
 * `rep_name` must be NUL terminated; `out` must hold `k` doubles.
 */
enum PolarredStatus polarred_spectrum(const struct PolarredModel *model,
                                      const char *rep_name,
                                      size_t grid_n,
                                      size_t k,
                                      double *out);

/**
 * Integrates the reduced flow from (q, p, xi) for time `t_end` with
 * step `dt`, overwriting the buffers with the final state and filling
 * `summary` with conservation data. `use_strang` selects the splitting
 * integrator instead of Runge-Kutta.
 *
 * # Safety
 * `q`, `p` must hold rank doubles, `xi` spin-dim doubles, and
 * `summary` one writable struct.
 */
enum PolarredStatus polarred_integrate(const struct PolarredModel *model,
                                       double *q,
                                       double *p,
                                       double *xi,
                                       double t_end,
                                       double dt,
                                       int use_strang,
                                       struct PolarredFlowSummary *summary);

/**
 * Runs the seeded verification suite with `mc_samples` Monte Carlo
 * draws for the quadrature check. Writes the number of failed checks
 * and returns Ok even when checks fail; a nonzero status means the
 * suite itself could not run.
 *
 * # Safety
 * `out_failures` must point to one writable size_t.
 */
enum PolarredStatus polarred_verify(uint64_t seed, size_t mc_samples, size_t *out_failures);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POLARRED_H */
