#ifndef CGLB_H
#define CGLB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Amplitude-dependent coefficient selector for [`cglb_params_set_coefficient`].
 */
typedef enum CglbCoefficient {
  CGLB_COEFFICIENT_U = 0,
  CGLB_COEFFICIENT_V = 1,
  CGLB_COEFFICIENT_KAPPA = 2,
  CGLB_COEFFICIENT_S1 = 3,
  CGLB_COEFFICIENT_S2 = 4,
} CglbCoefficient;

typedef enum CglbCoupling {
  CGLB_COUPLING_KAPPA_ZERO = 0,
  CGLB_COUPLING_CONSTANT_COUPLING = 1,
  CGLB_COUPLING_GRADIENT_COUPLING = 2,
} CglbCoupling;

typedef enum CglbStatus {
  CGLB_STATUS_OK = 0,
  CGLB_STATUS_NULL_POINTER = 1,
  CGLB_STATUS_INVALID_ARGUMENT = 2,
  CGLB_STATUS_NO_PLANE_WAVE = 3,
  CGLB_STATUS_SOLVER_FAILURE = 4,
  CGLB_STATUS_PANIC = 5,
} CglbStatus;

/**
 * Opaque model coefficients.
 */
typedef struct CglbParams CglbParams;

/**
 * Opaque time stepper with its current state.
 */
typedef struct CglbSimulation CglbSimulation;

/**
 * Plane wave `P = r0·exp(i·theta0·x)`, `Ω = w0`.
 */
typedef struct CglbPlaneWave {
  double r0;
  double theta0;
  double w0;
} CglbPlaneWave;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. The pointer stays valid until
 * the next call into the library from the same thread.
 */
const char *cglb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cglb_version(void);

/**
 * Default coefficients (`ξ = m = 1`, everything else zero).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum CglbStatus cglb_params_new(struct CglbParams **out);

/**
 * # Safety
 * `params` must be null or a handle from [`cglb_params_new`] not yet freed.
 */
void cglb_params_free(struct CglbParams *params);

/**
 * Sets the coefficient `c0 + c1·r`.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum CglbStatus cglb_params_set_coefficient(struct CglbParams *params,
                                            enum CglbCoefficient which,
                                            double c0,
                                            double c1);

/**
 * Sets the diffusion `m` and the coupling `ξ`.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum CglbStatus cglb_params_set_scalars(struct CglbParams *params, double m, double xi);

/**
 * Solves the plane-wave constraints. `root < 0` picks the default branch,
 * otherwise the isolated amplitude with that ascending index. With `compatible`
 * the drift is fixed to `−u(r0)·theta0` and `w0` is only used when `theta0 = 0`.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum CglbStatus cglb_solve_plane_wave(const struct CglbParams *params,
                                      int32_t root,
                                      double w0,
                                      bool compatible,
                                      struct CglbPlaneWave *out);

/**
 * The three eigenvalues of the linearised symbol at `k`, sorted by descending
 * real part, written to `re[0..3]` and `im[0..3]`.
 *
 * # Safety
 * `params` and `wave` must be valid; `re` and `im` must each hold three doubles.
 */
enum CglbStatus cglb_eigenvalues_at_k(const struct CglbParams *params,
                                      const struct CglbPlaneWave *wave,
                                      enum CglbCoupling coupling,
                                      double k,
                                      double *re,
                                      double *im);

/**
 * Creates a simulation on a `dim`-dimensional periodic grid with `n` points per
 * axis, starting from `P = 0`, `Ω = 0`.
 *
 * # Safety
 * `params` must be a live handle and `out` writable.
 */
enum CglbStatus cglb_simulation_new(const struct CglbParams *params,
                                    uint32_t dim,
                                    uint32_t n,
                                    double length,
                                    double dt,
                                    struct CglbSimulation **out);

/**
 * # Safety
 * `sim` must be null or a handle from [`cglb_simulation_new`] not yet freed.
 */
void cglb_simulation_free(struct CglbSimulation *sim);

/**
 * Number of grid points (`n^dim`); the length of every array exchanged with a
 * simulation. `omega` arrays hold `dim` consecutive components.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum CglbStatus cglb_simulation_len(const struct CglbSimulation *sim, size_t *out);

/**
 * Replaces the state with physical values and resets the time to `t`.
 *
 * # Safety
 * `p_re`, `p_im` must hold `len` doubles and `omega` must hold `dim·len`.
 */
enum CglbStatus cglb_simulation_set_state(struct CglbSimulation *sim,
                                          const double *p_re,
                                          const double *p_im,
                                          const double *omega,
                                          size_t len,
                                          double t);

/**
 * Advances by `steps` time steps without forcing.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum CglbStatus cglb_simulation_step(struct CglbSimulation *sim, uint32_t steps);

/**
 * Copies the physical state out and writes the current time to `t`.
 *
 * # Safety
 * Same buffer sizes as [`cglb_simulation_set_state`]; `t` writable.
 */
enum CglbStatus cglb_simulation_get_state(const struct CglbSimulation *sim,
                                          double *p_re,
                                          double *p_im,
                                          double *omega,
                                          size_t len,
                                          double *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CGLB_H */
