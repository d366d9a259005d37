/* C interface to the gmol distribution library. */

#ifndef GMOL_H
#define GMOL_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum GmolStatus {
  GmolStatus_Ok = 0,
  /**
   * An argument is outside its mathematical domain.
   */
  GmolStatus_DomainError = 1,
  /**
   * A series or iteration failed to reach its tolerance.
   */
  GmolStatus_AccuracyError = 2,
  /**
   * The optimizer failed or the fit is unusable.
   */
  GmolStatus_NonConvergence = 3,
  /**
   * A dataset violates its structural requirements.
   */
  GmolStatus_DesignError = 4,
  /**
   * A null pointer or malformed buffer was passed.
   */
  GmolStatus_InvalidArgument = 5,
  /**
   * A result is not representable (overflow/underflow).
   */
  GmolStatus_RangeError = 6,
  /**
   * An internal panic was caught at the boundary.
   */
  GmolStatus_Panic = 7,
} GmolStatus;

/**
 * Model selector for fitting.
 */
typedef enum GmolModel {
  GmolModel_Gmol = 0,
  GmolModel_Mol = 1,
  GmolModel_Lomax = 2,
} GmolModel;

/**
 * Opaque handle to a fitted model.
 */
typedef struct GmolFit GmolFit;

/**
 * Plain-struct parameter vector (alpha, lambda, tau, beta).
 */
typedef struct GmolParams {
  double alpha;
  double lambda;
  double tau;
  double beta;
} GmolParams;

/**
 * Goodness-of-fit report (flat struct of the eight statistics).
 */
typedef struct GmolGof {
  double w_star;
  double a_star;
  double ks;
  double ks_p;
  double aic;
  double caic;
  double bic;
  double hqic;
} GmolGof;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Validate a parameter vector. Returns Ok when (alpha, lambda, tau, beta)
 * lies in the admissible domain.
 */
enum GmolStatus gmol_params_validate(const struct GmolParams *params);

/**
 * CDF at `x`.
 */
enum GmolStatus gmol_cdf(const struct GmolParams *params, double x, double *out);

/**
 * Density at `x`.
 */
enum GmolStatus gmol_pdf(const struct GmolParams *params, double x, double *out);

/**
 * Survival 1 − F(x).
 */
enum GmolStatus gmol_survival(const struct GmolParams *params, double x, double *out);

/**
 * Hazard rate pdf/survival.
 */
enum GmolStatus gmol_hrf(const struct GmolParams *params, double x, double *out);

/**
 * Quantile at probability `u` in (0, 1).
 */
enum GmolStatus gmol_quantile(const struct GmolParams *params, double u, double *out);

/**
 * Draw `n` values by seeded inverse-transform sampling into `out`
 * (capacity at least `n`).
 */
enum GmolStatus gmol_sample(const struct GmolParams *params,
                            uintptr_t n,
                            uint64_t seed,
                            double *out);

/**
 * Log-likelihood of `data[0..n]` under the given parameters.
 */
enum GmolStatus gmol_loglik(const struct GmolParams *params,
                            const double *data,
                            uintptr_t n,
                            double *out);

/**
 * Fit `model` to `data[0..n]` by maximum likelihood. `init` may be null
 * (the default deterministic start is used). On success `*out` owns a new
 * fit handle; release it with `gmol_fit_free`.
 */
enum GmolStatus gmol_fit_mle(const double *data,
                             uintptr_t n,
                             enum GmolModel model,
                             const struct GmolParams *init,
                             uint64_t seed,
                             struct GmolFit **out);

/**
 * Fitted parameter vector.
 */
enum GmolStatus gmol_fit_params(const struct GmolFit *fit, struct GmolParams *out);

/**
 * Standard errors in canonical (alpha, lambda, tau, beta) order; entries
 * for parameters the model pins are NaN, as is everything when the
 * information matrix was singular. `out` must hold 4 values.
 */
enum GmolStatus gmol_fit_se(const struct GmolFit *fit, double *out);

/**
 * Maximized log-likelihood.
 */
enum GmolStatus gmol_fit_loglik(const struct GmolFit *fit, double *out);

/**
 * Whether the optimizer met its tolerances (1) or not (0).
 */
enum GmolStatus gmol_fit_converged(const struct GmolFit *fit, int32_t *out);

/**
 * Goodness-of-fit statistics of the fit on its own data.
 */
enum GmolStatus gmol_fit_gof(const struct GmolFit *fit, struct GmolGof *out);

/**
 * Release a fit handle. Null is a no-op; a handle must not be used after
 * it has been freed.
 */
void gmol_fit_free(struct GmolFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GMOL_H */
