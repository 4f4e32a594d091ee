#ifndef MFDFA_H
#define MFDFA_H

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/**
 * Direction code for [`MfdfaOptions::direction`]: forward boxes only.
 */
#define MFDFA_DIRECTION_FORWARD 0

/**
 * Direction code for [`MfdfaOptions::direction`]: boxes from both ends.
 */
#define MFDFA_DIRECTION_BOTH 1

/**
 * Result of every call. The first three values match the CLI exit codes.
 */
typedef enum MfdfaStatus {
  MFDFA_STATUS_OK = 0,
  MFDFA_STATUS_INVALID_INPUT = 1,
  MFDFA_STATUS_CONFIG = 2,
  MFDFA_STATUS_NUMERICAL = 3,
  MFDFA_STATUS_NULL_POINTER = 4,
  MFDFA_STATUS_BUFFER_TOO_SMALL = 5,
  MFDFA_STATUS_PANIC = 6,
} MfdfaStatus;

/**
 * Opaque analysis result.
 */
typedef struct MfdfaAnalysis MfdfaAnalysis;

/**
 * Engine settings. Obtain defaults from [`mfdfa_options_default`].
 */
typedef struct MfdfaOptions {
  uint32_t poly_order;
  size_t scale_min;
  size_t scale_max;
  size_t scale_count;
  double q_min;
  double q_max;
  double q_step;
  uint32_t direction;
  double support_dimension;
} MfdfaOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mfdfa_version(void);

/**
 * Message of the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *mfdfa_last_error_message(void);

struct MfdfaOptions mfdfa_options_default(void);

/**
 * Runs the full analysis on `n` returns. `options` may be null for the
 * defaults. On success `*out` receives a handle owned by the caller.
 *
 * # Safety
 * `x` must point to `n` doubles, `options` must be null or valid, and
 * `out` must be a valid pointer to writable storage.
 */
enum MfdfaStatus mfdfa_analysis_run(const double *x,
                                    size_t n,
                                    const struct MfdfaOptions *options,
                                    struct MfdfaAnalysis **out);

/**
 * Releases a handle from [`mfdfa_analysis_run`]. Null is ignored.
 *
 * # Safety
 * `handle` must be null or a live handle not freed before.
 */
void mfdfa_analysis_free(struct MfdfaAnalysis *handle);

/**
 * Number of q values, which is the length of every per-q array. Returns 0
 * for a null handle.
 *
 * # Safety
 * `handle` must be null or live.
 */
size_t mfdfa_analysis_len(const struct MfdfaAnalysis *handle);

/**
 * # Safety
 * `handle` must be null or live; `out` must be null or writable.
 */
enum MfdfaStatus mfdfa_analysis_delta_alpha(const struct MfdfaAnalysis *handle, double *out);

/**
 * Copies the q-grid into `out` (capacity `len`).
 *
 * # Safety
 * `handle` must be null or live; `out` must hold `len` doubles.
 */
enum MfdfaStatus mfdfa_analysis_q(const struct MfdfaAnalysis *handle, double *out, size_t len);

/**
 * Copies `h(q)`.
 *
 * # Safety
 * As [`mfdfa_analysis_q`].
 */
enum MfdfaStatus mfdfa_analysis_hurst(const struct MfdfaAnalysis *handle, double *out, size_t len);

/**
 * Copies `tau(q)`.
 *
 * # Safety
 * As [`mfdfa_analysis_q`].
 */
enum MfdfaStatus mfdfa_analysis_tau(const struct MfdfaAnalysis *handle, double *out, size_t len);

/**
 * Copies `alpha(q)`.
 *
 * # Safety
 * As [`mfdfa_analysis_q`].
 */
enum MfdfaStatus mfdfa_analysis_alpha(const struct MfdfaAnalysis *handle, double *out, size_t len);

/**
 * Copies `f(alpha(q))`.
 *
 * # Safety
 * As [`mfdfa_analysis_q`].
 */
enum MfdfaStatus mfdfa_analysis_f(const struct MfdfaAnalysis *handle, double *out, size_t len);

/**
 * Seeded uniform permutation of `x` written to `out`; both hold `n` values.
 *
 * # Safety
 * `x` and `out` must each hold `n` doubles; they may not overlap.
 */
enum MfdfaStatus mfdfa_shuffle(const double *x, size_t n, uint64_t seed, double *out);

/**
 * Replaces points with `|x| > k * sigma` by linear interpolation.
 *
 * # Safety
 * `x` and `out` must each hold `n` doubles; they may not overlap.
 */
enum MfdfaStatus mfdfa_threshold_filter(const double *x, size_t n, double k, double *out);

/**
 * Writes a `2^levels`-point binomial cascade into `out` (capacity `len`).
 *
 * # Safety
 * `out` must hold `len` doubles.
 */
enum MfdfaStatus mfdfa_binomial_cascade(uint32_t levels,
                                        double a,
                                        uint64_t seed,
                                        double *out,
                                        size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MFDFA_H */
