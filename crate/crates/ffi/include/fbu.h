#ifndef FBU_H
#define FBU_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FbuStatus {
  FBU_STATUS_OK = 0,
  FBU_STATUS_NULL_POINTER = 1,
  FBU_STATUS_INVALID_ARGUMENT = 2,
  FBU_STATUS_UNKNOWN_SHAPE = 3,
  FBU_STATUS_NO_BOUND_STATE = 4,
  FBU_STATUS_NUMERICAL = 5,
  FBU_STATUS_IO = 6,
  FBU_STATUS_OUT_OF_RANGE = 7,
  // The run finished but at least one acceptance flag failed.
  FBU_STATUS_CHECKS_FAILED = 8,
  FBU_STATUS_PANIC = 9,
} FbuStatus;

typedef enum FbuShapeKind {
  FBU_SHAPE_KIND_CONTACT = 0,
  FBU_SHAPE_KIND_TYPE_I = 1,
  FBU_SHAPE_KIND_TYPE_II = 2,
} FbuShapeKind;

typedef enum FbuParity {
  FBU_PARITY_EVEN = 0,
  FBU_PARITY_ODD = 1,
} FbuParity;

typedef struct FbuShape FbuShape;

typedef struct FbuSpectrum FbuSpectrum;

typedef struct FbuTwoBody FbuTwoBody;

// Scalar results of a two-body solve.
typedef struct FbuTwoBodySummary {
  double v0;
  double q0;
  double e0;
  double q0_asymptotic;
  double overlap;
  double symmetric_fraction;
  double norm_residual;
  size_t grid_points;
} FbuTwoBodySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the next
// failing call on the same thread.
const char *fbu_last_error(void);

void fbu_clear_error(void);

// Library version as a static NUL-terminated string.
const char *fbu_version(void);

// Catalog shape with parameter overrides (`keys[i] = values[i]`, `n` entries;
// `keys` and `values` may be null when `n` is zero).
//
// # Safety
// `name` and each `keys[i]` must be NUL-terminated strings; `values` must hold `n` doubles.
enum FbuStatus fbu_shape_new(const char *name,
                             const char *const *keys,
                             const double *values,
                             size_t n,
                             struct FbuShape **out);

// # Safety
// `shape` must come from [`fbu_shape_new`] and not be used afterwards.
void fbu_shape_free(struct FbuShape *shape);

// # Safety
// `shape` must be a live handle; `out` must be writable.
enum FbuStatus fbu_shape_kind(const struct FbuShape *shape, enum FbuShapeKind *out);

// Fourier transform `F(p)` as real and imaginary parts.
//
// # Safety
// `shape` must be a live handle; `re` and `im` must be writable.
enum FbuStatus fbu_shape_transform(const struct FbuShape *shape, double p, double *re, double *im);

// # Safety
// `shape` must be a live handle; `out` must be writable.
enum FbuStatus fbu_two_body_solve(const struct FbuShape *shape, double v0, struct FbuTwoBody **out);

// # Safety
// `result` must come from [`fbu_two_body_solve`] and not be used afterwards.
void fbu_two_body_free(struct FbuTwoBody *result);

// # Safety
// `result` must be a live handle; `out` must be writable.
enum FbuStatus fbu_two_body_summary(const struct FbuTwoBody *result, struct FbuTwoBodySummary *out);

// Copies the momentum grid and `φ(p)` into caller buffers of length `len`,
// which must be at least the `grid_points` of the summary.
//
// # Safety
// `result` must be a live handle; the three buffers must hold `len` doubles.
enum FbuStatus fbu_two_body_wavefunction(const struct FbuTwoBody *result,
                                         double *p,
                                         double *re,
                                         double *im,
                                         size_t len);

// Zero-range three-body spectrum in scaled units.
//
// # Safety
// `out` must be writable.
enum FbuStatus fbu_contact_spectrum(double alpha,
                                    enum FbuParity p,
                                    size_t n_states,
                                    struct FbuSpectrum **out);

// Finite-range three-body spectrum at coupling `v0`.
//
// # Safety
// `shape` must be a live handle; `out` must be writable.
enum FbuStatus fbu_finite_spectrum(const struct FbuShape *shape,
                                   double v0,
                                   double alpha,
                                   enum FbuParity p,
                                   size_t n_states,
                                   struct FbuSpectrum **out);

// # Safety
// `spectrum` must come from a spectrum constructor and not be used afterwards.
void fbu_spectrum_free(struct FbuSpectrum *spectrum);

// Number of bound states found (may be fewer than requested).
//
// # Safety
// `spectrum` must be a live handle; `out` must be writable.
enum FbuStatus fbu_spectrum_len(const struct FbuSpectrum *spectrum, size_t *out);

// Energy ratio `ε_n` and its eigen-equation residual.
//
// # Safety
// `spectrum` must be a live handle; `epsilon` and `residual` must be writable
// (`residual` may be null).
enum FbuStatus fbu_spectrum_state(const struct FbuSpectrum *spectrum,
                                  size_t n,
                                  double *epsilon,
                                  double *residual);

// Runs a TOML experiment config and writes its files into `out_dir` (null: no files).
// Returns [`FbuStatus::ChecksFailed`] when the run completes with failing flags.
//
// # Safety
// `config_toml` and `out_dir` must be NUL-terminated strings; `all_passed` may be null.
enum FbuStatus fbu_run_config(const char *config_toml, const char *out_dir, int *all_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FBU_H */
