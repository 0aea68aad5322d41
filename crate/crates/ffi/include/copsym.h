#ifndef COPSYM_H
#define COPSYM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CopsymStatus {
  COPSYM_STATUS_OK = 0,
  COPSYM_STATUS_NULL_POINTER = 1,
  COPSYM_STATUS_INVALID_PARAMETER = 2,
  COPSYM_STATUS_INVALID_INPUT = 3,
  COPSYM_STATUS_NUMERIC_FAILURE = 4,
  COPSYM_STATUS_PANIC = 5,
} CopsymStatus;

typedef enum CopsymSymmetry {
  COPSYM_SYMMETRY_REFLECTION = 0,
  COPSYM_SYMMETRY_RADIAL = 1,
  COPSYM_SYMMETRY_JOINT = 2,
} CopsymSymmetry;

// A bivariate sample on the unit square.
typedef struct CopsymSample CopsymSample;

// Outcome of one symmetry test.
typedef struct CopsymTestResult CopsymTestResult;

// Test configuration; fill with `copsym_test_config_default`.
typedef struct CopsymTestConfig {
  enum CopsymSymmetry symmetry;
  size_t m;
  size_t m0;
  size_t p;
  size_t n_boot;
  double alpha;
  uint64_t seed;
  bool share_null;
  bool fixed_anchors;
} CopsymTestConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next `copsym_*` call on the same thread.
const char *copsym_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *copsym_version(void);

// Wrap `n` points given as interleaved `u0, v0, u1, v1, ...` in `(0, 1]`.
//
// # Safety
// `uv` must point to `2 * n` readable doubles and `out` to writable storage.
enum CopsymStatus copsym_sample_from_points(const double *uv, size_t n, struct CopsymSample **out);

// Pseudo-observations (midranks divided by `n`) of two raw columns.
//
// # Safety
// `x` and `y` must each point to `n` readable doubles.
enum CopsymStatus copsym_pseudo_observations(const double *x,
                                             const double *y,
                                             size_t n,
                                             struct CopsymSample **out);

// Draw `n` points from a copula given as JSON, for example
// `{"family":"clayton","params":[2.0]}` or
// `{"family":"khoudraji","delta":0.5,"inner":{"family":"gumbel","params":[2.0]}}`.
//
// # Safety
// `spec_json` must be a NUL-terminated string.
enum CopsymStatus copsym_simulate(const char *spec_json,
                                  size_t n,
                                  uint64_t seed,
                                  struct CopsymSample **out);

// Draw `n` points from the named family at Kendall's tau `tau`.
//
// # Safety
// `family` must be a NUL-terminated string.
enum CopsymStatus copsym_simulate_tau(const char *family,
                                      double tau,
                                      size_t n,
                                      uint64_t seed,
                                      struct CopsymSample **out);

// # Safety
// `sample` must be a live handle and `out` writable.
enum CopsymStatus copsym_sample_len(const struct CopsymSample *sample, size_t *out);

// Copy the points, interleaved, into `out`, which holds `capacity` doubles
// and must have room for `2 * len`.
//
// # Safety
// `sample` must be a live handle and `out` must point to `capacity` writable doubles.
enum CopsymStatus copsym_sample_points(const struct CopsymSample *sample,
                                       double *out,
                                       size_t capacity);

// # Safety
// `sample` must come from this library and not be used afterwards. NULL is ignored.
void copsym_sample_free(struct CopsymSample *sample);

// Empirical copula of `sample` at `(u, v)`.
//
// # Safety
// `sample` must be a live handle and `out` writable.
enum CopsymStatus copsym_ecdf(const struct CopsymSample *sample, double u, double v, double *out);

// Modified band depth of `k` curves stored row-major in `curves` (`k * p`
// values); writes `k` depths to `depths`.
//
// # Safety
// `curves` must hold `k * p` readable doubles and `depths` `k` writable ones.
enum CopsymStatus copsym_mbd(const double *curves, size_t k, size_t p, double *depths);

// Defaults for a sample of size `n`.
//
// # Safety
// `out` must be writable.
enum CopsymStatus copsym_test_config_default(enum CopsymSymmetry symmetry,
                                             size_t n,
                                             struct CopsymTestConfig *out);

// Run the symmetry test on `sample`.
//
// # Safety
// `sample` and `config` must be live, `out` writable.
enum CopsymStatus copsym_run_test(const struct CopsymSample *sample,
                                  const struct CopsymTestConfig *config,
                                  struct CopsymTestResult **out);

// # Safety
// `result` must be a live handle and `out` writable.
enum CopsymStatus copsym_test_result_p_value(const struct CopsymTestResult *result, double *out);

// # Safety
// `result` must be a live handle and `out` writable.
enum CopsymStatus copsym_test_result_w_observed(const struct CopsymTestResult *result,
                                                uint64_t *out);

// # Safety
// `result` must be a live handle and `out` writable.
enum CopsymStatus copsym_test_result_reject(const struct CopsymTestResult *result, bool *out);

// JSON report of the result; `full` adds every bootstrap statistic.
// Release the string with `copsym_string_free`.
//
// # Safety
// `result` must be a live handle and `out` writable.
enum CopsymStatus copsym_test_result_to_json(const struct CopsymTestResult *result,
                                             bool full,
                                             char **out);

// # Safety
// `result` must come from this library and not be used afterwards. NULL is ignored.
void copsym_test_result_free(struct CopsymTestResult *result);

// # Safety
// `s` must come from this library and not be used afterwards. NULL is ignored.
void copsym_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COPSYM_H */
