#ifndef CHI3_H
#define CHI3_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Chi3DriftForm {
  CHI3_DRIFT_FORM_EXACT = 0,
  CHI3_DRIFT_FORM_WEAK_FIELD = 1,
} Chi3DriftForm;

typedef enum Chi3ModelKind {
  CHI3_MODEL_KIND_EHA = 0,
  CHI3_MODEL_KIND_HM = 1,
  CHI3_MODEL_KIND_SLM = 2,
} Chi3ModelKind;

typedef enum Chi3Status {
  CHI3_STATUS_OK = 0,
  CHI3_STATUS_NULL_POINTER = 1,
  CHI3_STATUS_INVALID_ARGUMENT = 2,
  CHI3_STATUS_DOMAIN = 3,
  CHI3_STATUS_INVALID_PARAMETER = 4,
  CHI3_STATUS_UNSTABLE = 5,
  CHI3_STATUS_STABILITY = 6,
  CHI3_STATUS_NO_STEADY_STATE = 7,
  CHI3_STATUS_SPECTRAL_RESOLUTION = 8,
  CHI3_STATUS_NO_CONVERGENCE = 9,
  CHI3_STATUS_CONFIG = 10,
  CHI3_STATUS_IO = 11,
  CHI3_STATUS_PANIC = 99,
} Chi3Status;

/**
 * Result of a Monte Carlo spectrum run.
 */
typedef struct Chi3McResult Chi3McResult;

/**
 * A model linearized about its semiclassical operating point.
 */
typedef struct Chi3Model Chi3Model;

/**
 * Medium and cavity constants.
 */
typedef struct Chi3Params Chi3Params;

typedef struct Chi3ModelInfo {
  /**
   * Field decay rate A (rad/s); the frequency unit of `omega_bar`.
   */
  double decay;
  /**
   * Intracavity intensity U.
   */
  double intensity;
  /**
   * Phase of the intracavity field.
   */
  double phase;
  double beta_u;
  /**
   * Scaled offset of the cavity from the drive.
   */
  double eps;
} Chi3ModelInfo;

typedef struct Chi3OptimalPhase {
  /**
   * Local-oscillator phase of the quietest quadrature.
   */
  double theta0;
  double g_min;
  double g_max;
  /**
   * Nonzero when the noise does not depend on the phase.
   */
  int32_t degenerate;
} Chi3OptimalPhase;

typedef struct Chi3InvFreeMoments {
  double mean_alpha_re;
  double mean_alpha_im;
  double mean_n;
  double s;
  double mu_re;
  double mu_im;
} Chi3InvFreeMoments;

typedef struct Chi3GenerationStats {
  double mean_n;
  double linewidth;
  double mandel_xi;
} Chi3GenerationStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes of the last error message on this thread, without the
 * terminating NUL. Zero when no error has been recorded.
 */
size_t chi3_last_error_length(void);

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * `len - 1` bytes). Returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t chi3_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *chi3_version(void);

/**
 * New parameter set holding the defaults. Never null.
 */
struct Chi3Params *chi3_params_new(void);

/**
 * # Safety
 * `p` must be null or come from [`chi3_params_new`] and not be freed yet.
 */
void chi3_params_free(struct Chi3Params *p);

/**
 * Sets a parameter by name (`gamma`, `delta`, `c_out`, `fc`, ...).
 *
 * # Safety
 * `p` must be a live handle, `key` a NUL-terminated string.
 */
enum Chi3Status chi3_params_set(struct Chi3Params *p, const char *key, double value);

/**
 * # Safety
 * `p` must be a live handle, `key` a NUL-terminated string, `out` writable.
 */
enum Chi3Status chi3_params_get(const struct Chi3Params *p, const char *key, double *out);

/**
 * Checks the construction invariants of the parameter set.
 *
 * # Safety
 * `p` must be a live handle.
 */
enum Chi3Status chi3_params_validate(const struct Chi3Params *p);

/**
 * Linearizes `kind` about its steady state and stores the handle in `out`.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum Chi3Status chi3_model_new(const struct Chi3Params *p,
                               enum Chi3ModelKind kind,
                               enum Chi3DriftForm form,
                               struct Chi3Model **out);

/**
 * # Safety
 * `m` must be null or come from [`chi3_model_new`] and not be freed yet.
 */
void chi3_model_free(struct Chi3Model *m);

/**
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum Chi3Status chi3_model_info(const struct Chi3Model *m, struct Chi3ModelInfo *out);

/**
 * Normally ordered output spectrum at `n` scaled frequencies ω/A for the
 * quadrature `theta_rel` away from the field phase.
 *
 * # Safety
 * `omega_bar` must point to `n` readable doubles and `out` to `n` writable.
 */
enum Chi3Status chi3_model_spectrum(const struct Chi3Model *m,
                                    const double *omega_bar,
                                    size_t n,
                                    double theta_rel,
                                    double *out);

/**
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum Chi3Status chi3_model_optimal_phase(const struct Chi3Model *m,
                                         double omega_bar,
                                         struct Chi3OptimalPhase *out);

/**
 * Monte Carlo estimate of the spectrum from `n_traj` trajectories.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
enum Chi3Status chi3_model_simulate(const struct Chi3Model *m,
                                    size_t n_traj,
                                    uint64_t seed,
                                    double theta_rel,
                                    struct Chi3McResult **out);

/**
 * Number of frequency bins in a Monte Carlo result (0 for null).
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t chi3_mc_len(const struct Chi3McResult *r);

/**
 * Copies up to `cap` bins. Any of the output arrays may be null to skip it.
 *
 * # Safety
 * `r` must be a live handle; non-null arrays must hold `cap` doubles.
 */
enum Chi3Status chi3_mc_copy(const struct Chi3McResult *r,
                             size_t cap,
                             double *omega_bar,
                             double *g_mc,
                             double *std_err,
                             double *g_exact);

/**
 * # Safety
 * `r` must be null or come from [`chi3_model_simulate`] and not be freed yet.
 */
void chi3_mc_free(struct Chi3McResult *r);

/**
 * Stationary moments of the inversion-free medium at resonance, referred
 * to the local-oscillator phase `theta`.
 *
 * # Safety
 * `out` must be writable.
 */
enum Chi3Status chi3_invfree_moments(double q0,
                                     double beta,
                                     double x,
                                     double a0,
                                     double c,
                                     double theta,
                                     struct Chi3InvFreeMoments *out);

/**
 * Photon number, linewidth and Mandel parameter of light generated
 * without injection.
 *
 * # Safety
 * `out` must be writable.
 */
enum Chi3Status chi3_generation_stats(double q0,
                                      double beta,
                                      double c,
                                      struct Chi3GenerationStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHI3_H */
