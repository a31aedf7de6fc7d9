#ifndef CAUSAL_LOCUS_H
#define CAUSAL_LOCUS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define CL_OK 0

/**
 * A required pointer argument was null.
 */
#define CL_ERR_NULL_ARGUMENT 1

/**
 * Input text failed to parse.
 */
#define CL_ERR_PARSE 2

/**
 * Inputs parsed but failed validation or a precondition.
 */
#define CL_ERR_VALIDATION 3

/**
 * A numerical procedure failed to converge or left its domain.
 */
#define CL_ERR_NUMERIC 4

/**
 * Causal classification constants returned in `ClPointData::cls`.
 */
#define CL_CLASS_SPACELIKE 0

#define CL_CLASS_TIMELIKE 1

#define CL_CLASS_LIGHTLIKE_NONDEGENERATE 2

#define CL_CLASS_LIGHTLIKE_DEGENERATE 3

/**
 * Opaque handle to a graph hypersurface in a Lorentzian chart.
 */
typedef struct ClSurface ClSurface;

/**
 * Point-analysis results; `h_mean` is NaN on the light-like set.
 */
typedef struct ClPointData {
  double b;
  double a;
  double theta;
  double h_mean;
  int cls;
} ClPointData;

/**
 * Verdict and residual of the light-like line containment check.
 */
typedef struct ClLineCheck {
  double max_residual;
  int all_degenerate;
  int verdict;
} ClLineCheck;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a graph surface over Minkowski space from an expression in the
 * variables x1…xn. On success writes an owned handle to `out`.
 *
 * # Safety
 * `f` must be a valid NUL-terminated string and `out` a valid pointer.
 */
int cl_surface_new_minkowski(uintptr_t n, const char *f, struct ClSurface **out);

/**
 * Create a surface from the builtin example catalog (e.g. "F1",
 * "kobayashi"). The entry self-checks its closed-form oracle on load.
 *
 * # Safety
 * `id` must be a valid NUL-terminated string and `out` a valid pointer.
 */
int cl_surface_from_example(const char *id, struct ClSurface **out);

/**
 * Domain dimension n of the surface.
 *
 * # Safety
 * `s` must be a handle returned by a constructor and not yet freed.
 */
uintptr_t cl_surface_dim(const struct ClSurface *s);

/**
 * Classify a domain point and report B, A, √|B| and the mean curvature.
 *
 * # Safety
 * `point` must reference `len` doubles; `out` must be a valid pointer.
 */
int cl_point_analyze(const struct ClSurface *s,
                     const double *point,
                     uintptr_t len,
                     struct ClPointData *out);

/**
 * Run the light-like line containment check from a degenerate point.
 *
 * # Safety
 * `origin` must reference `len` doubles; `out` must be a valid pointer.
 */
int cl_verify_lightline(const struct ClSurface *s,
                        const double *origin,
                        uintptr_t len,
                        double half_length,
                        double step,
                        double tol,
                        struct ClLineCheck *out);

/**
 * Release a surface handle. Null is ignored.
 *
 * # Safety
 * `s` must be a handle returned by a constructor, freed at most once.
 */
void cl_surface_free(struct ClSurface *s);

/**
 * Copy the last error message on this thread into `buf` (truncated,
 * always NUL-terminated). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must reference `len` writable bytes (or be null to query length).
 */
uintptr_t cl_last_error_message(char *buf, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAUSAL_LOCUS_H */
