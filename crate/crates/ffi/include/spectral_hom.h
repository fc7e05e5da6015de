#ifndef SPECTRAL_HOM_H
#define SPECTRAL_HOM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of every call.
 */
typedef enum ShStatus {
  SH_STATUS_OK = 0,
  SH_STATUS_NULL_POINTER = 1,
  SH_STATUS_INVALID_ARGUMENT = 2,
  SH_STATUS_CONFIG_ERROR = 3,
  SH_STATUS_CONSTRAINT_VIOLATION = 4,
  SH_STATUS_NUMERICAL_FAILURE = 5,
  SH_STATUS_BUFFER_TOO_SMALL = 6,
  SH_STATUS_PANIC = 7,
} ShStatus;

/**
 * Two-station interference setup; opaque to C.
 */
typedef struct ShInterference ShInterference;

/**
 * MDI-QKD scenario; opaque to C.
 */
typedef struct ShScenario ShScenario;

/**
 * Result of a Gaussian dip fit `baseline * (1 - visibility * exp(-(t - center)^2 / (2 width^2)))`.
 */
typedef struct ShDipFit {
  double baseline;
  double visibility;
  double center;
  double width;
  double residual_norm;
  size_t iterations;
} ShDipFit;

/**
 * Elementary-link description for the repeater rate functions.
 */
typedef struct ShLinkConfig {
  /**
   * End-to-end distance (m).
   */
  double total_distance;
  uint32_t links;
  /**
   * Fiber attenuation (dB/m).
   */
  double loss_db_per_m;
  /**
   * Source repetition rate (Hz).
   */
  double source_rate;
  uint64_t modes;
  /**
   * Memory storage time (s).
   */
  double storage_time;
  /**
   * Speed of light in fiber (m/s).
   */
  double fiber_speed;
  /**
   * Additional per-attempt efficiency in [0, 1].
   */
  double link_efficiency;
} ShLinkConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *sh_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sh_version(void);

/**
 * Builds an interference setup from the `hom` section of a JSON run configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ShStatus sh_interference_from_json(const char *json, struct ShInterference **out);

/**
 * Builds an interference setup from a built-in preset such as `hom-calibrated`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ShStatus sh_interference_from_preset(const char *name, struct ShInterference **out);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `handle` must come from an `sh_interference_from_*` call and not be used afterwards.
 */
void sh_interference_free(struct ShInterference *handle);

/**
 * Number of spectral modes (and channels per SSMM).
 *
 * # Safety
 * `handle` and `out` must be valid pointers.
 */
enum ShStatus sh_interference_mode_count(const struct ShInterference *handle, size_t *out);

/**
 * Sets the delay of station B relative to A (s).
 *
 * # Safety
 * `handle` must be a valid pointer.
 */
enum ShStatus sh_interference_set_delay(struct ShInterference *handle, double delay_s);

/**
 * Coincidence probability per pulse between SSMM 1 channel `c1` and SSMM 2 channel `c2`.
 *
 * # Safety
 * `handle` and `out` must be valid pointers.
 */
enum ShStatus sh_coincidence_probability(const struct ShInterference *handle,
                                         size_t c1,
                                         size_t c2,
                                         double *out);

/**
 * Coincidence probability at `steps` delays from `t_min` to `t_max`.
 *
 * Both output arrays must hold `capacity >= steps` values.
 *
 * # Safety
 * `handle` must be valid; `delays_out` and `probabilities_out` must each
 * point to `capacity` writable doubles.
 */
enum ShStatus sh_hom_dip_scan(const struct ShInterference *handle,
                              double t_min,
                              double t_max,
                              size_t steps,
                              size_t c1,
                              size_t c2,
                              double *delays_out,
                              double *probabilities_out,
                              size_t capacity);

/**
 * Fits a Gaussian dip to `n` points.
 *
 * # Safety
 * `xs` and `ys` must point to `n` readable doubles; `out` must be valid.
 */
enum ShStatus sh_fit_dip(const double *xs, const double *ys, size_t n, struct ShDipFit *out);

/**
 * Multiplexed repeater rate (Hz).
 *
 * # Safety
 * `config` and `out` must be valid pointers.
 */
enum ShStatus sh_repeater_rate(const struct ShLinkConfig *config, double *out);

/**
 * Direct-transmission (relay) rate over the full distance (Hz).
 *
 * # Safety
 * `config` and `out` must be valid pointers.
 */
enum ShStatus sh_relay_rate(const struct ShLinkConfig *config, double *out);

/**
 * Loads one of `current`, `soa_coupling` or `soa_coupling_dense`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ShStatus sh_scenario_from_preset(const char *name, struct ShScenario **out);

/**
 * Releases a scenario; NULL is ignored.
 *
 * # Safety
 * `handle` must come from [`sh_scenario_from_preset`] and not be used afterwards.
 */
void sh_scenario_free(struct ShScenario *handle);

/**
 * Largest M the scenario's device supports.
 *
 * # Safety
 * `handle` and `out` must be valid pointers.
 */
enum ShStatus sh_scenario_mode_limit(const struct ShScenario *handle, size_t *out);

/**
 * Total key rate (bits/s) and enhancement over the single-mode reference for M = 1..=max_modes.
 *
 * # Safety
 * `handle` must be valid; `rates_out` and `enhancement_out` must each point
 * to `capacity` writable doubles.
 */
enum ShStatus sh_enhancement_curve(const struct ShScenario *handle,
                                   size_t max_modes,
                                   double *rates_out,
                                   double *enhancement_out,
                                   size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRAL_HOM_H */
