/* C interface for the magnus series toolkit. Handles are opaque;
 * functions return MgStatus and set a thread-local message readable
 * via mg_last_error(). */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum MgStatus {
  MgStatusOk = 0,
  MgStatusInvalidArgument = 1,
  MgStatusParseError = 2,
  MgStatusNumericError = 3,
  MgStatusPanic = 4,
} MgStatus;

/**
 * Verdict codes for `mg_real_log_verdict`.
 */
typedef enum MgRealLogVerdict {
  MgRealLogYes = 0,
  MgRealLogNo = 1,
  MgRealLogPrincipalBranchInapplicable = 2,
} MgRealLogVerdict;

/**
 * Opaque handle to a coefficient-matrix model A(t).
 */
typedef struct MgModel MgModel;

/**
 * Opaque handle to a generated series Ω₁..Ω_N.
 */
typedef struct MgSeries MgSeries;

/**
 * Result of a unit-circle sweep.
 */
typedef struct MgSweepHit {
  bool found;
  double alpha;
  double t_star;
  double lambda_re;
  double lambda_im;
  int64_t winding;
  bool defective;
} MgSweepHit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *mg_last_error(void);

/**
 * Parse a model from its textual format. Returns null on failure (see
 * `mg_last_error`).
 *
 * # Safety
 * `text` must be a valid NUL-terminated string or null.
 */
struct MgModel *mg_model_from_text(const char *text);

/**
 * Load a model file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string or null.
 */
struct MgModel *mg_model_from_file(const char *path);

/**
 * Instantiate a built-in example by name (ex1, ex2, ex3, ex4).
 *
 * # Safety
 * `name` must be a valid NUL-terminated string or null.
 */
struct MgModel *mg_model_builtin(const char *name);

/**
 * # Safety
 * `model` must come from a `mg_model_*` constructor and not be freed twice.
 */
void mg_model_free(struct MgModel *model);

/**
 * # Safety
 * `model` must be a live handle or null.
 */
uint32_t mg_model_dim(const struct MgModel *model);

/**
 * # Safety
 * `model` must be a live handle or null.
 */
double mg_model_domain_end(const struct MgModel *model);

/**
 * Canonical textual form of an exact model; null for numeric-only models.
 * Free with `mg_string_free`.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
char *mg_model_to_text(const struct MgModel *model);

/**
 * # Safety
 * `s` must be a string returned by this library, freed at most once.
 */
void mg_string_free(char *s);

/**
 * Generate the first `order` exact series terms of the model.
 *
 * # Safety
 * `model` must be a live handle or null; `out` must point to writable
 * storage for one pointer.
 */
enum MgStatus mg_series_compute(const struct MgModel *model, uint32_t order, struct MgSeries **out);

/**
 * # Safety
 * `series` must come from `mg_series_compute` and not be freed twice.
 */
void mg_series_free(struct MgSeries *series);

/**
 * # Safety
 * `series` must be a live handle or null.
 */
uint32_t mg_series_order(const struct MgSeries *series);

/**
 * # Safety
 * `series` must be a live handle or null.
 */
uint32_t mg_series_dim(const struct MgSeries *series);

/**
 * Textual form of term n (1-based). Free with `mg_string_free`.
 *
 * # Safety
 * `series` must be a live handle or null.
 */
char *mg_series_term_text(const struct MgSeries *series, uint32_t n);

/**
 * Σ_{k≤n} Ω_k(t) into a row-major dim×dim buffer.
 *
 * # Safety
 * `series` must be a live handle or null; `out_rowmajor` must hold dim²
 * doubles.
 */
enum MgStatus mg_series_partial_sum(const struct MgSeries *series,
                                    uint32_t n,
                                    double t,
                                    double *out_rowmajor);

/**
 * Σ_{k≤n} κᵏ Ω_k(t) into separate real/imaginary row-major buffers.
 *
 * # Safety
 * `series` must be a live handle or null; both buffers must hold dim²
 * doubles.
 */
enum MgStatus mg_series_kappa_sum(const struct MgSeries *series,
                                  double kappa_re,
                                  double kappa_im,
                                  uint32_t n,
                                  double t,
                                  double *out_re,
                                  double *out_im);

/**
 * ‖Ωₙ(t)‖₂.
 *
 * # Safety
 * `series` must be a live handle or null; `out_norm` must be writable.
 */
enum MgStatus mg_series_term_norm(const struct MgSeries *series,
                                  uint32_t n,
                                  double t,
                                  double *out_norm);

/**
 * Empirical divergence onset over (0, t_max]: `*out_found` reports whether
 * the estimated κ-radius drops below 1, and `*out_t` holds the crossing.
 *
 * # Safety
 * `series` must be a live handle or null; outputs must be writable.
 */
enum MgStatus mg_series_divergence_onset(const struct MgSeries *series,
                                         double t_max,
                                         double *out_t,
                                         bool *out_found);

/**
 * γ(t) = ∫₀ᵗ ‖A(τ)‖₂ dτ.
 *
 * # Safety
 * `model` must be a live handle or null; `out_gamma` must be writable.
 */
enum MgStatus mg_action_norm(const struct MgModel *model, double t, double tol, double *out_gamma);

/**
 * Convergence certificate: γ(t) and whether convergence is guaranteed
 * (γ < π − margin).
 *
 * # Safety
 * `model` must be a live handle or null; outputs must be writable.
 */
enum MgStatus mg_certify(const struct MgModel *model,
                         double t,
                         double *out_gamma,
                         bool *out_guaranteed);

/**
 * Fundamental solution Y(t;κ) into real/imaginary row-major buffers.
 *
 * # Safety
 * `model` must be a live handle or null; both buffers must hold dim²
 * doubles.
 */
enum MgStatus mg_solve(const struct MgModel *model,
                       double kappa_re,
                       double kappa_im,
                       double t,
                       double tol,
                       double *out_re,
                       double *out_im);

/**
 * Real-logarithm verdict for Y(t;1).
 *
 * # Safety
 * `model` must be a live handle or null; `out_verdict` must be writable.
 */
enum MgStatus mg_real_log_verdict(const struct MgModel *model,
                                  double t,
                                  enum MgRealLogVerdict *out_verdict);

/**
 * Sweep κ over the unit circle and report the earliest defective,
 * origin-encircling collision below t_max, if any.
 *
 * # Safety
 * `model` must be a live handle or null; `out` must be writable.
 */
enum MgStatus mg_sweep(const struct MgModel *model,
                       double t_max,
                       uint32_t alpha_samples,
                       struct MgSweepHit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
