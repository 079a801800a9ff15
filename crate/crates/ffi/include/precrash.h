/* C API of the pre-crash simulation engine. */

#ifndef PRECRASH_H
#define PRECRASH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every API function.
 */
typedef enum PrecrashStatus {
  PRECRASH_STATUS_OK = 0,
  PRECRASH_STATUS_PARSE_ERROR = 1,
  PRECRASH_STATUS_VALIDATION_ERROR = 2,
  PRECRASH_STATUS_IO_ERROR = 3,
  PRECRASH_STATUS_CONFIG_ERROR = 4,
  PRECRASH_STATUS_INFEASIBLE = 5,
  PRECRASH_STATUS_OUT_OF_RANGE = 6,
  PRECRASH_STATUS_NULL_ARGUMENT = 7,
  PRECRASH_STATUS_INVALID_UTF8 = 8,
} PrecrashStatus;

/**
 * Opaque scenario handle.
 */
typedef struct PrecrashScenario PrecrashScenario;

/**
 * Result of a single simulation run.
 */
typedef struct PrecrashRunResult {
  /**
   * 1 when the run ended in a crash, 0 when avoided.
   */
  int32_t crashed;
  double t_end;
  double impact_speed_ego;
  double impact_relative_speed;
  /**
   * Number of brake stages that fired.
   */
  int32_t trigger_count;
  /**
   * Time of the first stage trigger; negative when nothing fired.
   */
  double first_trigger_t;
} PrecrashRunResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * # Safety
 * `ptr` must be null or a pointer previously returned by this library
 * through a string out-parameter.
 */
void precrash_string_free(char *ptr);

/**
 * Message of the most recent error on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread; do not free.
 */
const char *precrash_last_error(void);

/**
 * Parses a scenario from JSON text.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string; `out` must be a valid
 * pointer to receive the handle.
 */
enum PrecrashStatus precrash_scenario_from_json(const char *json,
                                                int32_t strict,
                                                struct PrecrashScenario **out);

/**
 * Loads a scenario from a JSON file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be valid.
 */
enum PrecrashStatus precrash_scenario_load(const char *path,
                                           int32_t strict,
                                           struct PrecrashScenario **out);

/**
 * # Safety
 * `scenario` must be null or a handle from a load/parse call, not yet freed.
 */
void precrash_scenario_free(struct PrecrashScenario *scenario);

/**
 * Scenario id as a newly allocated string (release with
 * [`precrash_string_free`]).
 *
 * # Safety
 * `scenario` and `out` must be valid pointers.
 */
enum PrecrashStatus precrash_scenario_id(const struct PrecrashScenario *scenario, char **out);

/**
 * Simulates one scenario with the given brake function.
 *
 * # Safety
 * `scenario` must be a live handle; `brake`/`sensor_set` valid strings;
 * `out` a valid pointer.
 */
enum PrecrashStatus precrash_simulate(const struct PrecrashScenario *scenario,
                                      const char *brake,
                                      const char *sensor_set,
                                      double ttc_threshold,
                                      int32_t friction_known,
                                      struct PrecrashRunResult *out);

/**
 * Runs a sweep over a directory of scenario files and returns the report
 * as a JSON string (release with [`precrash_string_free`]). `brakes`,
 * `sensor_sets` and `ttc_thresholds` are comma-separated lists.
 *
 * # Safety
 * All string arguments must be valid NUL-terminated strings; `out_json`
 * must be a valid pointer.
 */
enum PrecrashStatus precrash_sweep(const char *scenario_dir,
                                   const char *brakes,
                                   const char *sensor_sets,
                                   const char *ttc_thresholds,
                                   int32_t friction_known,
                                   int32_t classify,
                                   int32_t jobs,
                                   char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PRECRASH_H */
