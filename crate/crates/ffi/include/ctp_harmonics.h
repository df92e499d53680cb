#ifndef CTP_HARMONICS_H
#define CTP_HARMONICS_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum CthmStatus {
  CTHM_STATUS_OK = 0,
  CTHM_STATUS_NULL_ARGUMENT = 1,
  CTHM_STATUS_INVALID_ARGUMENT = 2,
  CTHM_STATUS_NUMERIC_FAILURE = 3,
  CTHM_STATUS_BUFFER_TOO_SMALL = 4,
  CTHM_STATUS_PANIC = 5,
} CthmStatus;

/**
 * Opaque model handle: the observed oscillator plus its environment.
 */
typedef struct CthmModel CthmModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message into `buf` (NUL terminated, truncated to
 * `cap`); returns the full message length.
 */
size_t cthm_last_error(char *buf, size_t cap);

/**
 * New model with no environment.
 */
struct CthmModel *cthm_model_new(double mass, double omega0);

/**
 * Attach a discrete bath of `n` modes with frequencies `omegas` and
 * couplings `couplings`.
 */
enum CthmStatus cthm_model_set_discrete_bath(struct CthmModel *model,
                                             const double *omegas,
                                             const double *couplings,
                                             size_t n);

/**
 * Attach an Ohmic bath with coupling `g` and Drude cutoff `omega_d`.
 */
enum CthmStatus cthm_model_set_ohmic_bath(struct CthmModel *model, double g, double omega_d);

void cthm_model_free(struct CthmModel *model);

/**
 * Stability margin of the coupled motion; positive means stable.
 */
enum CthmStatus cthm_stability_margin(const struct CthmModel *model, double *margin_out);

/**
 * Integrate the full coupled equations of motion under a kick `j0` at `t0`
 * and write the system coordinate on the uniform grid `[0, t_end]` with
 * `n_samples` points into `x_out`.
 */
enum CthmStatus cthm_simulate_kick(const struct CthmModel *model,
                                   double j0,
                                   double t0,
                                   double t_end,
                                   size_t n_samples,
                                   double *x_out);

/**
 * Kick response through the retarded propagator sampled on a frequency grid
 * `[-omega_max, omega_max)` with `n_freq` nodes and prescription `epsilon`.
 */
enum CthmStatus cthm_response_kick(const struct CthmModel *model,
                                   double omega_max,
                                   size_t n_freq,
                                   double epsilon,
                                   double j0,
                                   double t0,
                                   double t_end,
                                   size_t n_samples,
                                   double *x_out);

/**
 * Locate propagator poles inside the rectangle; writes up to `cap` entries
 * and the found count.
 */
enum CthmStatus cthm_find_poles(const struct CthmModel *model,
                                double epsilon,
                                double re_min,
                                double re_max,
                                double im_min,
                                double im_max,
                                double *re_out,
                                double *im_out,
                                double *residue_re_out,
                                double *residue_im_out,
                                size_t cap,
                                size_t *n_found);

/**
 * Apparent spectral function of physical coordinate `k` under a Gaussian
 * (`lorentzian = 0`) or Lorentzian (`lorentzian != 0`) window of observation
 * time `t_obs`, sampled at `omegas`.
 */
enum CthmStatus cthm_apparent_spectral_function(const struct CthmModel *model,
                                                size_t k,
                                                double t_obs,
                                                int32_t lorentzian,
                                                const double *omegas,
                                                size_t n,
                                                double *rho_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CTP_HARMONICS_H */
