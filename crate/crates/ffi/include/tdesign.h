#ifndef TDESIGN_H
#define TDESIGN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  TD_STATUS_OK = 0,
  TD_STATUS_INVALID_ARGUMENT = 1,
  TD_STATUS_VALIDATION = 2,
  TD_STATUS_CONVERGENCE = 3,
  TD_STATUS_NULL_POINTER = 4,
  TD_STATUS_PANIC = 5,
} TdStatus;

/**
 * A design together with its design interval.
 */
typedef struct TdDesign TdDesign;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *td_last_error(void);

/**
 * Creates a validated design on `[lower, upper]` from `len` points and weights.
 *
 * # Safety
 * `support` and `weights` must point to `len` doubles; `out` must be writable.
 */
TdStatus td_design_new(const double *support,
                       const double *weights,
                       size_t len,
                       double lower,
                       double upper,
                       TdDesign **out);

/**
 * Parses a design from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
TdStatus td_design_from_json(const char *json, TdDesign **out);

/**
 * JSON form of the design; release with `td_string_free`. Null on a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
char *td_design_to_json(const TdDesign *design);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed only once.
 */
void td_string_free(char *s);

/**
 * # Safety
 * `design` must be null or a live handle, freed only once.
 */
void td_design_free(TdDesign *design);

/**
 * Number of support points; 0 for a null handle.
 *
 * # Safety
 * `design` must be null or a live handle.
 */
size_t td_design_len(const TdDesign *design);

/**
 * Copies support points and weights into buffers of at least
 * `td_design_len` doubles. Either buffer may be null.
 *
 * # Safety
 * Non-null buffers must hold `capacity` doubles.
 */
TdStatus td_design_copy(const TdDesign *design, double *support, double *weights, size_t capacity);

/**
 * The design `ξ_{m,β}` on `[-r, r]`.
 *
 * # Safety
 * `out` must be writable.
 */
TdStatus td_xi_m_beta(size_t m, double beta, double r, TdDesign **out);

/**
 * Locally optimal design for polynomials of degrees `m1 < m2` on
 * `[lower, upper]` at the reduced parameter `b` of length `m2 - m1 - 1`.
 * `value` may be null.
 *
 * # Safety
 * `b` must point to `b_len` doubles; `out` must be writable.
 */
TdStatus td_local_polynomial(size_t m1,
                             size_t m2,
                             double lower,
                             double upper,
                             const double *b,
                             size_t b_len,
                             TdDesign **out,
                             double *value);

/**
 * Locally optimal design discriminating Michaelis–Menten from EMAX with
 * fixed `theta2 = (θ₂₀, θ₂₁, θ₂₂)` on `[lower, upper]`.
 *
 * # Safety
 * `theta2` must point to three doubles; `out` must be writable.
 */
TdStatus td_local_michaelis_menten(const double *theta2,
                                   double lower,
                                   double upper,
                                   TdDesign **out,
                                   double *value);

/**
 * Bayesian design under the discrete prior with `atoms` parameters, each a
 * row of `m2 - m1 - 1` values in `b`, and masses `masses`.
 *
 * # Safety
 * `b` must hold `atoms * (m2 - m1 - 1)` doubles and `masses` must hold
 * `atoms`; `out` must be writable.
 */
TdStatus td_bayes_polynomial(size_t m1,
                             size_t m2,
                             double lower,
                             double upper,
                             const double *b,
                             const double *masses,
                             size_t atoms,
                             TdDesign **out);

/**
 * Standardized maximin design over `ℬ = [-d, d]` (`d` may be infinite)
 * for polynomials with `m2 = m1 + 2`.
 *
 * # Safety
 * `out` must be writable; `value` may be null.
 */
TdStatus td_maximin_polynomial(size_t m1,
                               size_t m2,
                               double lower,
                               double upper,
                               double d,
                               TdDesign **out,
                               double *value);

/**
 * T-efficiency of `design` for the polynomial pair at `b`.
 *
 * # Safety
 * `design` must be a live handle, `b` must hold `b_len` doubles and
 * `efficiency` must be writable.
 */
TdStatus td_efficiency_polynomial(const TdDesign *design,
                                  size_t m1,
                                  size_t m2,
                                  const double *b,
                                  size_t b_len,
                                  double *efficiency);

/**
 * T-efficiency of `design` for Michaelis–Menten against EMAX at `theta2`.
 *
 * # Safety
 * `design` must be a live handle, `theta2` must hold three doubles and
 * `efficiency` must be writable.
 */
TdStatus td_efficiency_michaelis_menten(const TdDesign *design,
                                        const double *theta2,
                                        double *efficiency);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TDESIGN_H */
