#ifndef GFFV_H
#define GFFV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GffvError {
  GFFV_ERROR_OK = 0,
  GFFV_ERROR_NULL_POINTER = 1,
  GFFV_ERROR_INVALID_ARGUMENT = 2,
  GFFV_ERROR_CONFIG = 3,
  GFFV_ERROR_NUMERIC = 4,
  GFFV_ERROR_IO = 5,
  GFFV_ERROR_PANIC = 6,
} GffvError;

typedef enum GffvRunStatus {
  GFFV_RUN_STATUS_RUNNING = 0,
  GFFV_RUN_STATUS_STEADY = 1,
  GFFV_RUN_STATUS_FINISHED = 2,
  GFFV_RUN_STATUS_BLOW_UP = 3,
} GffvRunStatus;

/**
 * Opaque simulation handle.
 */
typedef struct GffvSimulation GffvSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *gffv_version(void);

/**
 * Message for the last failed call on this thread, or null.
 * Valid until the next `gffv_*` call on the same thread.
 */
const char *gffv_last_error_message(void);

/**
 * Builds a simulation from a JSON configuration, either a full
 * configuration or `{"scenario": name, ...overrides}`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out` must be writable.
 */
enum GffvError gffv_simulation_new(const char *config_json, struct GffvSimulation **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle from [`gffv_simulation_new`] not yet freed.
 */
void gffv_simulation_free(struct GffvSimulation *sim);

/**
 * One accepted step not passing `t_stop`.
 *
 * # Safety
 * `sim` must be a live handle; `status` must be writable.
 */
enum GffvError gffv_simulation_step(struct GffvSimulation *sim,
                                    double t_stop,
                                    enum GffvRunStatus *status);

/**
 * Steps until steady state, `t_end` or blow-up.
 *
 * # Safety
 * `sim` must be a live handle; `status` must be writable.
 */
enum GffvError gffv_simulation_run(struct GffvSimulation *sim, enum GffvRunStatus *status);

/**
 * Number of cells.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be writable.
 */
enum GffvError gffv_simulation_len(const struct GffvSimulation *sim, size_t *out);

/**
 * Copies the cell averages (row-major in 2D) into `buf`.
 *
 * # Safety
 * `sim` must be a live handle; `buf` must hold `len` writable doubles.
 */
enum GffvError gffv_simulation_values(const struct GffvSimulation *sim, double *buf, size_t len);

/**
 * Current model time.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be writable.
 */
enum GffvError gffv_simulation_time(const struct GffvSimulation *sim, double *out);

/**
 * Total mass.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be writable.
 */
enum GffvError gffv_simulation_mass(const struct GffvSimulation *sim, double *out);

/**
 * Discrete free energy.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be writable.
 */
enum GffvError gffv_simulation_entropy(const struct GffvSimulation *sim, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GFFV_H */
