#ifndef PHOSPHENE_H
#define PHOSPHENE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum PvStatus {
  PV_STATUS_OK = 0,
  PV_STATUS_NULL_POINTER = 1,
  PV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Malformed mask archive.
   */
  PV_STATUS_FORMAT = 3,
  PV_STATUS_IO = 4,
  /**
   * A metric is undefined for the input, e.g. an empty gaze trace.
   */
  PV_STATUS_UNDEFINED_METRIC = 5,
  /**
   * The output buffer is too small; the required size was still written.
   */
  PV_STATUS_BUFFER_TOO_SMALL = 6,
  PV_STATUS_PANIC = 7,
  PV_STATUS_INTERNAL = 8,
} PvStatus;

/**
 * Values accepted by the `policy` argument of [`pv_render_gcss`].
 */
typedef enum PvSelectionPolicy {
  /**
   * Highlight every mask under the gaze point.
   */
  PV_SELECTION_POLICY_UNION = 0,
  /**
   * Highlight only the smallest mask under the gaze point.
   */
  PV_SELECTION_POLICY_SMALLEST_AREA = 1,
} PvSelectionPolicy;

/**
 * Mask archive handle.
 */
typedef struct PvArchive PvArchive;

/**
 * Electrode layout handle.
 */
typedef struct PvLayout PvLayout;

/**
 * Simulation parameters; see [`pv_sim_params_default`].
 */
typedef struct PvSimParams {
  uint32_t n_electrodes;
  double field_radius_deg;
  double pulse_freq_hz;
  double current_ua;
  /**
   * Nonzero enables the activation threshold.
   */
  uint8_t thresholding;
  double threshold_ua;
  double magnification_a_deg;
  double magnification_k_mm;
  double excitability_ua_mm2;
  uint32_t output_size;
} PvSimParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *pv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pv_version(void);

/**
 * Writes the default simulation parameters to `out`.
 *
 * # Safety
 * `out` must be null or point to writable storage for a `PvSimParams`.
 */
enum PvStatus pv_sim_params_default(struct PvSimParams *out);

/**
 * Samples an electrode layout. Release it with [`pv_layout_free`].
 *
 * # Safety
 * `params` must be null or point to a `PvSimParams`; `out` must be null or
 * point to writable storage for a handle pointer.
 */
enum PvStatus pv_layout_sample(const struct PvSimParams *params,
                               uint64_t seed,
                               struct PvLayout **out);

/**
 * Number of electrodes in a layout, or 0 for null.
 *
 * # Safety
 * `layout` must be null or a live handle.
 */
size_t pv_layout_len(const struct PvLayout *layout);

/**
 * Copies electrode `i`'s visual-field position in degrees (y up).
 *
 * # Safety
 * `layout` must be null or a live handle; `x_deg` and `y_deg` must be null
 * or writable.
 */
enum PvStatus pv_layout_electrode(const struct PvLayout *layout,
                                  size_t i,
                                  double *x_deg,
                                  double *y_deg);

/**
 * Releases a layout. Null is ignored.
 *
 * # Safety
 * `layout` must be null or a handle from [`pv_layout_sample`] not yet freed.
 */
void pv_layout_free(struct PvLayout *layout);

/**
 * Loads a PMSK archive from a file. Release it with [`pv_archive_free`].
 *
 * # Safety
 * `path` must be null or a NUL-terminated string; `out` must be null or
 * writable.
 */
enum PvStatus pv_archive_load(const char *path, struct PvArchive **out);

/**
 * Decodes a PMSK archive held in memory. `image_id` may be null.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes; `image_id` must be null or
 * NUL-terminated; `out` must be null or writable.
 */
enum PvStatus pv_archive_decode(const uint8_t *bytes,
                                size_t len,
                                const char *image_id,
                                struct PvArchive **out);

/**
 * Writes the archive's frame size.
 *
 * # Safety
 * `archive` must be null or a live handle; `width` and `height` must be
 * null or writable.
 */
enum PvStatus pv_archive_size(const struct PvArchive *archive, uint32_t *width, uint32_t *height);

/**
 * Number of masks in an archive, or 0 for null.
 *
 * # Safety
 * `archive` must be null or a live handle.
 */
size_t pv_archive_mask_count(const struct PvArchive *archive);

/**
 * Ids of the masks covering pixel (x, y), in archive order. Writes up to
 * `capacity` ids to `ids` and the total to `count`; returns
 * `PV_STATUS_BUFFER_TOO_SMALL` when the total exceeds `capacity`.
 *
 * # Safety
 * `archive` must be null or a live handle; `ids` must hold `capacity`
 * writable elements (or be null with `capacity` 0); `count` must be null
 * or writable.
 */
enum PvStatus pv_archive_masks_at(const struct PvArchive *archive,
                                  double x,
                                  double y,
                                  uint32_t *ids,
                                  size_t capacity,
                                  size_t *count);

/**
 * Releases an archive. Null is ignored.
 *
 * # Safety
 * `archive` must be null or a handle from this library not yet freed.
 */
void pv_archive_free(struct PvArchive *archive);

/**
 * Canny edge map of a `width` x `height` grayscale image. `out` receives
 * `width * height` values, 1 on edges and 0 elsewhere.
 *
 * # Safety
 * `image` must hold `width * height` readable values and `out` as many
 * writable ones.
 */
enum PvStatus pv_canny(const double *image,
                       uint32_t width,
                       uint32_t height,
                       double low_threshold,
                       double high_threshold,
                       double gaussian_sigma,
                       double *out);

/**
 * Renders the phosphene percept of a grayscale stimulus for a gaze point
 * in stimulus pixels. `out` receives `output_size * output_size` values.
 *
 * # Safety
 * `layout` and `params` must be null or valid; `stimulus` must hold
 * `width * height` readable values; `out` must hold `output_size²`
 * writable values.
 */
enum PvStatus pv_render_frame(const struct PvLayout *layout,
                              const struct PvSimParams *params,
                              const double *stimulus,
                              uint32_t width,
                              uint32_t height,
                              double gaze_x,
                              double gaze_y,
                              double *out);

/**
 * Composes the object-highlighting stimulus for a gaze point (masks under
 * the gaze at full brightness over edges scaled by `edge_gain`) and
 * renders it. `edges` may be null for a mask-only stimulus; otherwise it
 * holds one value per archive pixel. `policy` is a [`PvSelectionPolicy`].
 *
 * # Safety
 * Handles and `params` must be null or valid; `edges` must be null or hold
 * the archive's pixel count; `out` must hold `output_size²` values.
 */
enum PvStatus pv_render_gcss(const struct PvLayout *layout,
                             const struct PvSimParams *params,
                             const struct PvArchive *archive,
                             const double *edges,
                             double gaze_x,
                             double gaze_y,
                             double edge_gain,
                             int32_t policy,
                             double *out);

/**
 * Shannon entropy in bits of `n` gaze samples, given as interleaved
 * (x, y) pixel pairs, binned on a `grid_size` square grid over the frame.
 *
 * # Safety
 * `xy` must hold `2 * n` readable values; `bits` must be null or writable.
 */
enum PvStatus pv_gaze_entropy(const double *xy,
                              size_t n,
                              uint32_t width,
                              uint32_t height,
                              uint32_t grid_size,
                              double *bits);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOSPHENE_H */
