#ifndef TRILAND_H
#define TRILAND_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TrilandStatus {
  TRILAND_STATUS_OK = 0,
  TRILAND_STATUS_NULL_POINTER = 1,
  TRILAND_STATUS_INVALID_ARGUMENT = 2,
  TRILAND_STATUS_DOMAIN = 3,
  TRILAND_STATUS_UNBOUNDED = 4,
  TRILAND_STATUS_SCENARIO = 5,
  TRILAND_STATUS_IO = 6,
  TRILAND_STATUS_INVARIANT = 7,
  TRILAND_STATUS_OUT_OF_RANGE = 8,
  TRILAND_STATUS_PANIC = 9,
} TrilandStatus;

typedef enum TrilandSector {
  TRILAND_SECTOR_S1A = 0,
  TRILAND_SECTOR_S1B = 1,
  TRILAND_SECTOR_S2A = 2,
  TRILAND_SECTOR_S2B = 3,
  TRILAND_SECTOR_S3A = 4,
  TRILAND_SECTOR_S3B = 5,
  TRILAND_SECTOR_CENTER = 6,
} TrilandSector;

typedef enum TrilandRotation {
  TRILAND_ROTATION_NONE = 0,
  TRILAND_ROTATION_LEFT = 1,
  TRILAND_ROTATION_RIGHT = 2,
  TRILAND_ROTATION_LEFT60 = 3,
  TRILAND_ROTATION_RIGHT60 = 4,
} TrilandRotation;

typedef enum TrilandTranslation {
  TRILAND_TRANSLATION_NONE = 0,
  TRILAND_TRANSLATION_FORWARD = 1,
  TRILAND_TRANSLATION_BACKWARD = 2,
} TrilandTranslation;

/**
 * Opaque finished episode.
 */
typedef struct TrilandEpisode TrilandEpisode;

/**
 * Opaque simulation scenario.
 */
typedef struct TrilandScenario TrilandScenario;

typedef struct TrilandVec3 {
  double x;
  double y;
  double z;
} TrilandVec3;

typedef struct TrilandPhaseTriplet {
  double th12;
  double th23;
  double th31;
} TrilandPhaseTriplet;

typedef struct TrilandRadiusExtremes {
  double r_min;
  double phi_min;
  /**
   * On the forward axis.
   */
  double r_max;
  double r_peak;
  double phi_peak;
} TrilandRadiusExtremes;

typedef struct TrilandVoltages {
  double v12;
  double v23;
  double v31;
} TrilandVoltages;

typedef struct TrilandDecision {
  enum TrilandSector sector;
  enum TrilandRotation rotation;
  enum TrilandTranslation translation;
  bool locked;
} TrilandDecision;

typedef struct TrilandMetrics {
  bool locked;
  bool on_target;
  bool left_tracking_area;
  /**
   * False when the episode never locked; `time_to_first_lock` is then 0.
   */
  bool has_first_lock;
  double time_to_first_lock;
  double final_horizontal_error;
  double final_altitude;
  double path_length;
  double duration;
  uint64_t ticks;
  uint64_t count_left;
  uint64_t count_right;
  uint64_t count_left60;
  uint64_t count_right60;
  uint64_t count_forward;
  uint64_t count_backward;
  uint64_t count_lock;
} TrilandMetrics;

typedef struct TrilandTraceRecord {
  double time;
  struct TrilandVec3 lp_offset;
  double yaw_deg;
  struct TrilandVoltages raw;
  struct TrilandVoltages zeroed;
  uint32_t codes[3];
  struct TrilandDecision decision;
} TrilandTraceRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *triland_version(void);

/**
 * Message for the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *triland_last_error_message(void);

/**
 * Phase shifts (deg, unwrapped) at the array for an LP offset in metres.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TrilandStatus triland_phase_shifts(double spacing_m,
                                        double frequency_hz,
                                        struct TrilandVec3 lp_offset,
                                        struct TrilandPhaseTriplet *out);

/**
 * Tracking-boundary radius, m, along LP azimuth `phi_deg`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TrilandStatus triland_boundary_radius(double spacing_m,
                                           double frequency_hz,
                                           double altitude_m,
                                           double phi_deg,
                                           double phase_limit_deg,
                                           double *out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum TrilandStatus triland_min_max_radius(double spacing_m,
                                          double frequency_hz,
                                          double altitude_m,
                                          double phase_limit_deg,
                                          struct TrilandRadiusExtremes *out);

/**
 * Cone half angle, deg.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TrilandStatus triland_cone_half_angle(double spacing_m,
                                           double frequency_hz,
                                           double phase_limit_deg,
                                           double *out);

/**
 * Sensitivity, mV/cm.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TrilandStatus triland_sensitivity(double spacing_m,
                                       double frequency_hz,
                                       double altitude_m,
                                       double delta_vd,
                                       double *out);

/**
 * Sector decision for zeroed voltages.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TrilandStatus triland_classify(struct TrilandVoltages zeroed,
                                    double lock_threshold,
                                    bool drone_frame,
                                    struct TrilandDecision *out);

/**
 * Parses a TOML scenario.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum TrilandStatus triland_scenario_from_toml(const char *toml, struct TrilandScenario **out);

/**
 * Loads a TOML scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum TrilandStatus triland_scenario_load(const char *path, struct TrilandScenario **out);

/**
 * # Safety
 * `scenario` must be a live handle or NULL.
 */
enum TrilandStatus triland_scenario_set_seed(struct TrilandScenario *scenario, uint64_t seed);

/**
 * # Safety
 * `scenario` must be NULL or a handle not yet freed.
 */
void triland_scenario_free(struct TrilandScenario *scenario);

/**
 * Zeroing references from `cycles` centred acquisitions.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be valid for writes.
 */
enum TrilandStatus triland_calibrate_fixture(const struct TrilandScenario *scenario,
                                             uint32_t cycles,
                                             struct TrilandVoltages *out);

/**
 * Runs one episode.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be valid for writes.
 */
enum TrilandStatus triland_simulate(const struct TrilandScenario *scenario,
                                    struct TrilandEpisode **out);

/**
 * # Safety
 * `episode` must be a live handle; `out` must be valid for writes.
 */
enum TrilandStatus triland_episode_metrics(const struct TrilandEpisode *episode,
                                           struct TrilandMetrics *out);

/**
 * # Safety
 * `episode` must be a live handle; `out` must be valid for writes.
 */
enum TrilandStatus triland_episode_trace_len(const struct TrilandEpisode *episode, size_t *out);

/**
 * # Safety
 * `episode` must be a live handle; `out` must be valid for writes.
 */
enum TrilandStatus triland_episode_trace_record(const struct TrilandEpisode *episode,
                                                size_t index,
                                                struct TrilandTraceRecord *out);

/**
 * # Safety
 * `episode` must be NULL or a handle not yet freed.
 */
void triland_episode_free(struct TrilandEpisode *episode);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRILAND_H */
