#ifndef CRIMESCOPE_H
#define CRIMESCOPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Sampling scheme selector.
 */
typedef enum CrimescopeScheme {
  CRIMESCOPE_SCHEME_UNIFORM = 0,
  CRIMESCOPE_SCHEME_WEAK_VD = 1,
  CRIMESCOPE_SCHEME_STRONG_VD = 2,
} CrimescopeScheme;

/**
 * Result code of every fallible call.
 */
typedef enum CrimescopeStatus {
  CRIMESCOPE_STATUS_OK = 0,
  CRIMESCOPE_STATUS_INVALID_INPUT = 1,
  CRIMESCOPE_STATUS_INVALID_ARGUMENT = 2,
  CRIMESCOPE_STATUS_INFEASIBLE_RATE = 3,
  CRIMESCOPE_STATUS_UNDEFINED_METRIC = 4,
  CRIMESCOPE_STATUS_CONFIG = 5,
  CRIMESCOPE_STATUS_IO = 6,
  CRIMESCOPE_STATUS_NULL_POINTER = 7,
  CRIMESCOPE_STATUS_PANIC = 8,
  CRIMESCOPE_STATUS_OTHER = 9,
} CrimescopeStatus;

/**
 * Complex image.
 */
typedef struct CrimescopeImage CrimescopeImage;

/**
 * Centred k-space.
 */
typedef struct CrimescopeKSpace CrimescopeKSpace;

/**
 * Boolean sampling mask.
 */
typedef struct CrimescopeMask CrimescopeMask;

/**
 * Dictionary-learning settings; obtain defaults from
 * [`crimescope_dictl_params_default`].
 */
typedef struct CrimescopeDictlParams {
  size_t atoms;
  size_t sparsity;
  double lambda_d;
  size_t block;
  size_t n_iter;
  /**
   * 0 selects the default training-set size.
   */
  size_t train_patches;
  size_t stride;
  size_t ksvd_sweeps;
  bool subtract_mean;
  uint64_t seed;
} CrimescopeDictlParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next call on the same thread.
 */
const char *crimescope_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *crimescope_version(void);

/**
 * Builds a real image from `h * w` row-major values.
 *
 * # Safety
 * `data` must point to `h * w` doubles and `out` to writable storage.
 */
enum CrimescopeStatus crimescope_image_from_real(const double *data,
                                                 size_t h,
                                                 size_t w,
                                                 struct CrimescopeImage **out);

/**
 * Builds a complex image from `2 * h * w` interleaved (re, im) values.
 *
 * # Safety
 * `data` must point to `2 * h * w` doubles and `out` to writable storage.
 */
enum CrimescopeStatus crimescope_image_from_complex(const double *data,
                                                    size_t h,
                                                    size_t w,
                                                    struct CrimescopeImage **out);

/**
 * Writes the image height and width.
 *
 * # Safety
 * All pointers must be valid.
 */
enum CrimescopeStatus crimescope_image_shape(const struct CrimescopeImage *img,
                                             size_t *h,
                                             size_t *w);

/**
 * Copies `|img|` into `out` (`len` must equal `h * w`).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum CrimescopeStatus crimescope_image_magnitude(const struct CrimescopeImage *img,
                                                 double *out,
                                                 size_t len);

/**
 * Copies the image as interleaved (re, im) pairs (`len` must equal
 * `2 * h * w`).
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum CrimescopeStatus crimescope_image_copy(const struct CrimescopeImage *img,
                                            double *out,
                                            size_t len);

/**
 * Releases an image; null is ignored.
 *
 * # Safety
 * `img` must come from this library and not be used afterwards.
 */
void crimescope_image_free(struct CrimescopeImage *img);

/**
 * Centred unitary forward DFT.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CrimescopeStatus crimescope_dft2(const struct CrimescopeImage *img,
                                      struct CrimescopeKSpace **out);

/**
 * Centred unitary inverse DFT.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CrimescopeStatus crimescope_idft2(const struct CrimescopeKSpace *k,
                                       struct CrimescopeImage **out);

/**
 * Releases k-space; null is ignored.
 *
 * # Safety
 * `k` must come from this library and not be used afterwards.
 */
void crimescope_kspace_free(struct CrimescopeKSpace *k);

/**
 * Draws a mask over an `h x w` grid at rate `1 / acceleration`, with a fully
 * sampled central `calib_h x calib_w` block. `power` 0 selects the scheme's
 * default.
 *
 * # Safety
 * `out` must be valid.
 */
enum CrimescopeStatus crimescope_mask_draw(size_t h,
                                           size_t w,
                                           enum CrimescopeScheme scheme,
                                           double acceleration,
                                           uint32_t power,
                                           size_t calib_h,
                                           size_t calib_w,
                                           uint64_t seed,
                                           struct CrimescopeMask **out);

/**
 * Fraction of sampled entries.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CrimescopeStatus crimescope_mask_realized_rate(const struct CrimescopeMask *mask,
                                                    double *rate);

/**
 * Sampled fraction of the central `h x w` region of the mask.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CrimescopeStatus crimescope_mask_effective_rate(const struct CrimescopeMask *mask,
                                                     size_t h,
                                                     size_t w,
                                                     double *rate);

/**
 * Copies the mask as 0/1 bytes, row-major.
 *
 * # Safety
 * `out` must point to `len` writable bytes.
 */
enum CrimescopeStatus crimescope_mask_copy(const struct CrimescopeMask *mask,
                                           uint8_t *out,
                                           size_t len);

/**
 * Releases a mask; null is ignored.
 *
 * # Safety
 * `mask` must come from this library and not be used afterwards.
 */
void crimescope_mask_free(struct CrimescopeMask *mask);

/**
 * ℓ1-wavelet compressed-sensing reconstruction (db4, 4 levels). `max_iters`
 * 0 selects the default.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CrimescopeStatus crimescope_reconstruct_cs(const struct CrimescopeKSpace *k,
                                                const struct CrimescopeMask *mask,
                                                double lambda,
                                                size_t max_iters,
                                                struct CrimescopeImage **out);

/**
 * Default dictionary-learning settings.
 */
struct CrimescopeDictlParams crimescope_dictl_params_default(void);

/**
 * Dictionary-learning reconstruction.
 *
 * # Safety
 * Pointers must be valid.
 */
enum CrimescopeStatus crimescope_reconstruct_dictl(const struct CrimescopeKSpace *k,
                                                   const struct CrimescopeMask *mask,
                                                   const struct CrimescopeDictlParams *params,
                                                   struct CrimescopeImage **out);

/**
 * Range-normalised NRMSE of `est` against `reference` (magnitudes).
 *
 * # Safety
 * Pointers must be valid.
 */
enum CrimescopeStatus crimescope_nrmse(const struct CrimescopeImage *reference,
                                       const struct CrimescopeImage *est,
                                       double *out);

/**
 * Mean SSIM of `est` against `reference` (magnitudes).
 *
 * # Safety
 * Pointers must be valid.
 */
enum CrimescopeStatus crimescope_ssim(const struct CrimescopeImage *reference,
                                      const struct CrimescopeImage *est,
                                      double *out);

/**
 * JPEG round trip of an 8-bit greyscale image at quality `qf` (1 to 100).
 *
 * # Safety
 * `pixels` and `out` must each hold `h * w` bytes.
 */
enum CrimescopeStatus crimescope_jpeg_roundtrip(const uint8_t *pixels,
                                                size_t h,
                                                size_t w,
                                                uint8_t qf,
                                                uint8_t *out);

/**
 * Runs the experiment described by a TOML file and writes its report.
 * `out_dir` may be null to keep the configured directory; `jobs` 0 uses all
 * cores.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out_dir` null or one.
 */
enum CrimescopeStatus crimescope_run_experiment(const char *config_path,
                                                const char *out_dir,
                                                size_t jobs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRIMESCOPE_H */
