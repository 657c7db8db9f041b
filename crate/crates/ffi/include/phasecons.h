#ifndef PHASECONS_H
#define PHASECONS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PHASECONS_OK 0

#define PHASECONS_NULL_POINTER 1

#define PHASECONS_INVALID_ARGUMENT 2

#define PHASECONS_NUMERICAL 3

#define PHASECONS_PANIC 4

#define PHASECONS_VERDICT_CONSISTENT 0

#define PHASECONS_VERDICT_INCONSISTENT 1

#define PHASECONS_VERDICT_INCONCLUSIVE 2

#define PHASECONS_CM_PASS 0

#define PHASECONS_CM_FAIL 1

#define PHASECONS_CM_INCONCLUSIVE 2

/**
 * A parsed single-variable expression.
 */
typedef struct PhExpr PhExpr;

/**
 * A separable augmented density read from a model description.
 */
typedef struct PhModel PhModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length in
 * bytes, excluding the terminator; 0 when there is no error.
 */
size_t phasecons_last_error_message(char *buf, size_t len);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void phasecons_string_free(char *s);

/**
 * Parses an expression such as `"pow(x, 0.5)*exp(-x)"`.
 */
int32_t phasecons_expr_parse(const char *src, struct PhExpr **out);

void phasecons_expr_free(struct PhExpr *h);

int32_t phasecons_expr_eval(const struct PhExpr *h, double x, double *out);

/**
 * E^λ_{p,b}(z).
 */
int32_t phasecons_ml_eval(double lambda, double p, double b, double z, double *out);

/**
 * D^μ_a f(x) for μ ≥ 0.
 */
int32_t phasecons_frac_derivative(const struct PhExpr *h,
                                  double a,
                                  double mu,
                                  double x,
                                  double *out);

/**
 * I^λ_a f(x); negative λ gives the derivative of order -λ.
 */
int32_t phasecons_rl_integral(const struct PhExpr *h,
                              double a,
                              double lambda,
                              double x,
                              double *out);

/**
 * Samples (-1)ⁿ f⁽ⁿ⁾ ≥ 0 for n ≤ `n_max` on `grid[0..len]`; writes a
 * `PHASECONS_CM_*` status.
 */
int32_t phasecons_cm_test(const struct PhExpr *h,
                          size_t n_max,
                          const double *grid,
                          size_t len,
                          int32_t *out_status);

/**
 * g(ℰ) for R = x^{-β}, with the potential part `h` and floor `e0`.
 */
int32_t phasecons_eddington_invert(const struct PhExpr *h,
                                   double e0,
                                   double beta,
                                   double e,
                                   double *out);

/**
 * Reads a model from the same JSON accepted by `phasecons check consistency`.
 */
int32_t phasecons_model_from_json(const char *json, struct PhModel **out);

void phasecons_model_free(struct PhModel *h);

/**
 * Runs the consistency checks with default settings; writes a
 * `PHASECONS_VERDICT_*` value.
 */
int32_t phasecons_model_verdict(const struct PhModel *h, int32_t *out_verdict);

/**
 * The full JSON report, byte-identical to the CLI's. Free the result with
 * [`phasecons_string_free`].
 */
int32_t phasecons_model_report_json(const struct PhModel *h, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHASECONS_H */
