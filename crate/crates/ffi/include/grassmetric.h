#ifndef GRASSMETRIC_H
#define GRASSMETRIC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. `GM_STATUS_OK` is zero.
 */
typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_NULL_POINTER = 1,
  GM_STATUS_INVALID_UTF8 = 2,
  GM_STATUS_PANIC = 3,
  GM_STATUS_NO_SIGN_CHANGE = 10,
  GM_STATUS_DIMENSION_MISMATCH,
  GM_STATUS_IDENTICAL_PLANES,
  GM_STATUS_DEGENERATE_QUADRUPLE,
  GM_STATUS_NON_TRANSVERSE_CONFIGURATION,
  GM_STATUS_EMPTY_INTERSECTION,
  GM_STATUS_NOT_PHOTON_RELATED,
  GM_STATUS_DIFFERENT_COMPONENTS,
  GM_STATUS_NOT_IN_DOMAIN,
  GM_STATUS_DUAL_NOT_ADMISSIBLE,
  GM_STATUS_CHART_DEGENERACY,
  GM_STATUS_BOUNDARY_PROXIMITY,
  GM_STATUS_EMPTY_DUAL_SAMPLE,
  GM_STATUS_NO_CHAIN_FOUND,
  GM_STATUS_UNKNOWN_PAIR,
  GM_STATUS_BINDING_OUT_OF_RANGE,
  GM_STATUS_INVALID_INPUT,
  GM_STATUS_INVARIANT_VIOLATION,
} GmStatus;

/**
 * Opaque domain handle.
 */
typedef struct GmDomain GmDomain;

/**
 * Opaque plane handle.
 */
typedef struct GmPlane GmPlane;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library on this thread.
 */
const char *gm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gm_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void gm_string_free(char *s);

/**
 * Builds a domain from `{"kind": "symmetric", "form": [...]}` or
 * `{"kind": "complement", "duals": [...], "reference": {...}}`.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum GmStatus gm_domain_from_json(const char *json, struct GmDomain **out_domain);

/**
 * # Safety
 * `d` must come from [`gm_domain_from_json`] or be null.
 */
void gm_domain_free(struct GmDomain *d);

/**
 * Builds a plane from `{"n": n, "k": k, "basis": [row-major n×k]}`.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` must be writable.
 */
enum GmStatus gm_plane_from_json(const char *json, struct GmPlane **out_plane);

/**
 * # Safety
 * `x` must come from [`gm_plane_from_json`] or be null.
 */
void gm_plane_free(struct GmPlane *x);

/**
 * Ambient dimension `n` and plane dimension `k`.
 *
 * # Safety
 * Handles must be valid; out-pointers writable.
 */
enum GmStatus gm_plane_shape(const struct GmPlane *x, size_t *n, size_t *k);

/**
 * Closed-form Kobayashi distance in a symmetric domain.
 *
 * # Safety
 * Handles must be valid; `out` writable.
 */
enum GmStatus gm_kobayashi_closed_form(const struct GmDomain *d,
                                       const struct GmPlane *x,
                                       const struct GmPlane *y,
                                       double *out_value);

/**
 * Carathéodory lower bound from `dual_samples` sampled duals, optionally
 * locally optimized.
 *
 * # Safety
 * Handles must be valid; `out` writable.
 */
enum GmStatus gm_caratheodory_lower(const struct GmDomain *d,
                                    const struct GmPlane *x,
                                    const struct GmPlane *y,
                                    size_t dual_samples,
                                    bool optimize,
                                    uint64_t seed,
                                    double *out_value);

/**
 * Full metric report as JSON. `config_json` may be null for the defaults,
 * otherwise it is a sandwich configuration object.
 *
 * # Safety
 * Handles must be valid; `config_json` null or NUL-terminated; `out_json`
 * writable. Free the result with [`gm_string_free`].
 */
enum GmStatus gm_sandwich_json(const struct GmDomain *d,
                               const struct GmPlane *x,
                               const struct GmPlane *y,
                               const char *config_json,
                               uint64_t seed,
                               char **out_json);

/**
 * Hilbert length of the photon segment from `x` to `y` inside the domain.
 *
 * # Safety
 * Handles must be valid; `out` writable.
 */
enum GmStatus gm_segment_length(const struct GmDomain *d,
                                const struct GmPlane *x,
                                const struct GmPlane *y,
                                double *out_value);

/**
 * `p − dim(x ∩ y)`.
 *
 * # Safety
 * Handles must be valid; `out` writable.
 */
enum GmStatus gm_arithmetic_distance(const struct GmPlane *x,
                                     const struct GmPlane *y,
                                     size_t *out_value);

/**
 * The Nagano pair table as a JSON array, optionally only the real-type rows.
 *
 * # Safety
 * `out_json` writable. Free the result with [`gm_string_free`].
 */
enum GmStatus gm_table_json(bool real_type_only, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRASSMETRIC_H */
