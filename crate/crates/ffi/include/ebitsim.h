#ifndef EBITSIM_H
#define EBITSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Settable fields of a link parameter set.
 */
typedef enum EbitLinkField {
  EBIT_LINK_FIELD_WAVELENGTH_M = 0,
  EBIT_LINK_FIELD_BEAM_WAIST_M = 1,
  EBIT_LINK_FIELD_OGS_APERTURE_M = 2,
  EBIT_LINK_FIELD_SAT_APERTURE_M = 3,
  EBIT_LINK_FIELD_ETA_ZENITH = 4,
  EBIT_LINK_FIELD_RELAY_EFFICIENCY = 5,
  EBIT_LINK_FIELD_POINTING_EFFICIENCY = 6,
  EBIT_LINK_FIELD_SOURCE_RATE_HZ = 7,
  EBIT_LINK_FIELD_MAX_DOWNLINK_GROUND_KM = 8,
  /**
   * Nonzero selects a per-link optimal ISL beam waist.
   */
  EBIT_LINK_FIELD_OPTIMAL_WAIST = 9,
} EbitLinkField;

/**
 * Result of every fallible call.
 */
typedef enum EbitStatus {
  EBIT_STATUS_OK = 0,
  EBIT_STATUS_NULL_POINTER = 1,
  EBIT_STATUS_INVALID_INPUT = 2,
  EBIT_STATUS_INVALID_SCENARIO = 3,
  EBIT_STATUS_IO = 4,
  EBIT_STATUS_OUT_OF_RANGE = 5,
  EBIT_STATUS_PANIC = 6,
} EbitStatus;

/**
 * Opaque constellation.
 */
typedef struct EbitConstellation EbitConstellation;

/**
 * Opaque link parameter set.
 */
typedef struct EbitLinkParams EbitLinkParams;

/**
 * Opaque sampled rate series.
 */
typedef struct EbitSeries EbitSeries;

typedef struct EbitSummary {
  double max_rate_hz;
  double mean_all_hz;
  double mean_visible_hz;
  size_t samples;
} EbitSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message on this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 when none.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t ebit_last_error_message(char *buf, size_t len);

/**
 * Creates a parameter set holding the library defaults.
 *
 * # Safety
 * `out_params` must be a valid pointer.
 */
enum EbitStatus ebit_link_params_new(struct EbitLinkParams **out_params);

/**
 * # Safety
 * `params` must be null or a handle from [`ebit_link_params_new`] not yet freed.
 */
void ebit_link_params_free(struct EbitLinkParams *params);

/**
 * Sets one field; the updated set must still validate.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum EbitStatus ebit_link_params_set(struct EbitLinkParams *params,
                                     enum EbitLinkField field,
                                     double value);

/**
 * # Safety
 * `params` must be a live handle and `value` a valid pointer.
 */
enum EbitStatus ebit_link_params_get(const struct EbitLinkParams *params,
                                     enum EbitLinkField field,
                                     double *value);

/**
 * Gaussian-beam aperture capture fraction over `l_m` meters.
 *
 * # Safety
 * `eta` must be a valid pointer.
 */
enum EbitStatus ebit_eta_fs(double l_m, double w0_m, double ra_m, double wavelength_m, double *eta);

/**
 * Atmospheric transmittance for a satellite at `h_km` seen at slant range `l_km`.
 *
 * # Safety
 * `eta` must be a valid pointer.
 */
enum EbitStatus ebit_eta_atm(double h_km, double l_km, double eta_zenith, double *eta);

/**
 * Full downlink transmittance including cutoff and horizon blocking.
 *
 * # Safety
 * `params` must be a live handle and `eta` a valid pointer.
 */
enum EbitStatus ebit_downlink_transmittance(const struct EbitLinkParams *params,
                                            double h_km,
                                            double l_km,
                                            double *eta);

/**
 * Fewest satellites in a relay chain spanning `d_km` at altitude `h_km`.
 *
 * # Safety
 * `params` must be a live handle and `count` a valid pointer.
 */
enum EbitStatus ebit_min_relay_count(const struct EbitLinkParams *params,
                                     double d_km,
                                     double h_km,
                                     size_t *count);

/**
 * Pair rate through the shortest feasible relay chain.
 *
 * # Safety
 * `params` must be a live handle and `rate_hz` a valid pointer.
 */
enum EbitStatus ebit_chain_rate(const struct EbitLinkParams *params,
                                double d_km,
                                double h_km,
                                double *rate_hz);

/**
 * Polar Walker grid. `full_spread` nonzero spreads planes over 360°
 * instead of 180°.
 *
 * # Safety
 * `out_constellation` must be a valid pointer.
 */
enum EbitStatus ebit_constellation_new_walker(size_t planes,
                                              size_t slots,
                                              double altitude_km,
                                              double phase_offset_rad,
                                              int32_t full_spread,
                                              struct EbitConstellation **out_constellation);

/**
 * Rotates every plane's RAAN by `delta_rad`.
 *
 * # Safety
 * `constellation` must be a live handle.
 */
enum EbitStatus ebit_constellation_rotate_raan(struct EbitConstellation *constellation,
                                               double delta_rad);

/**
 * # Safety
 * `constellation` must be null or a live handle.
 */
void ebit_constellation_free(struct EbitConstellation *constellation);

/**
 * Samples the best routed rate between two ground points every `step_s`
 * seconds over `[0, window_s)`.
 *
 * # Safety
 * Handles must be live and `out_series` a valid pointer.
 */
enum EbitStatus ebit_time_sweep(const struct EbitConstellation *constellation,
                                const struct EbitLinkParams *params,
                                double lat1_deg,
                                double lon1_deg,
                                double lat2_deg,
                                double lon2_deg,
                                double window_s,
                                double step_s,
                                struct EbitSeries **out_series);

/**
 * # Safety
 * `series` must be null or a live handle.
 */
void ebit_series_free(struct EbitSeries *series);

/**
 * # Safety
 * `series` must be a live handle and `summary` a valid pointer.
 */
enum EbitStatus ebit_series_summary(const struct EbitSeries *series, struct EbitSummary *summary);

/**
 * Sample `index`: time in seconds and rate in Hz.
 *
 * # Safety
 * `series` must be a live handle; `t_s` and `rate_hz` valid pointers.
 */
enum EbitStatus ebit_series_sample(const struct EbitSeries *series,
                                   size_t index,
                                   double *t_s,
                                   double *rate_hz);

/**
 * Runs a scenario given as JSON text. A non-null `out_dir` replaces the
 * scenario's output directory.
 *
 * # Safety
 * `scenario_json` must be a NUL-terminated string; `out_dir` null or one.
 */
enum EbitStatus ebit_run_scenario_json(const char *scenario_json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EBITSIM_H */
