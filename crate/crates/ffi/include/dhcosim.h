#ifndef DHCOSIM_H
#define DHCOSIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DhcStatus {
  DHC_STATUS_OK = 0,
  DHC_STATUS_NULL_POINTER = 1,
  DHC_STATUS_INVALID_ARGUMENT = 2,
  DHC_STATUS_CONFIG = 3,
  DHC_STATUS_IO = 4,
  DHC_STATUS_NUMERIC = 5,
  DHC_STATUS_PROTOCOL = 6,
  DHC_STATUS_NOT_FOUND = 7,
  DHC_STATUS_BUFFER_TOO_SMALL = 8,
  DHC_STATUS_PANIC = 9,
  DHC_STATUS_OTHER = 10,
} DhcStatus;

typedef struct DhcRunLog DhcRunLog;

typedef struct DhcScenario DhcScenario;

typedef struct DhcSimulator DhcSimulator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` and returns
 * the size it needs, including the NUL. Pass a null buffer to query the
 * size. Returns 0 when no error has been recorded.
 * `buf` must be null or valid for `cap` bytes.
 */
size_t dhc_last_error_message(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *dhc_version(void);

/**
 * Loads and validates a scenario file.
 * `path` must be a NUL-terminated string; `out` must be valid for a write.
 */
enum DhcStatus dhc_scenario_load(const char *path, struct DhcScenario **out);

/**
 * `scenario` must be null or a pointer from `dhc_scenario_load` not yet freed.
 */
void dhc_scenario_free(struct DhcScenario *scenario);

/**
 * Runs the whole scenario in-process.
 * `scenario` must be a live handle; `out` must be valid for a write.
 */
enum DhcStatus dhc_run(const struct DhcScenario *scenario, struct DhcRunLog **out);

/**
 * `log` must be null or a pointer from `dhc_run` not yet freed.
 */
void dhc_run_log_free(struct DhcRunLog *log);

/**
 * Number of communication steps in the log; 0 for a null handle.
 * `log` must be null or a live handle.
 */
size_t dhc_run_log_len(const struct DhcRunLog *log);

/**
 * Copies the series of `sim.port` into `buf`. `out_len` receives the
 * series length; if it exceeds `cap` nothing is copied and
 * `DHC_STATUS_BUFFER_TOO_SMALL` is returned.
 * Strings must be NUL-terminated, `buf` valid for `cap` doubles and
 * `out_len` valid for a write.
 */
enum DhcStatus dhc_run_log_series(const struct DhcRunLog *log,
                                  const char *sim,
                                  const char *port,
                                  double *buf,
                                  size_t cap,
                                  size_t *out_len);

/**
 * Writes the per-building and grid CSV files and the report into `out_dir`.
 * `log` must be a live handle and `out_dir` NUL-terminated.
 */
enum DhcStatus dhc_run_log_write(const struct DhcRunLog *log, const char *out_dir);

/**
 * Creates one simulator of the scenario (a building or the grid) for
 * stepping from C.
 * `scenario` must be a live handle, `id` NUL-terminated and `out` valid
 * for a write.
 */
enum DhcStatus dhc_simulator_new(const struct DhcScenario *scenario,
                                 const char *id,
                                 struct DhcSimulator **out);

/**
 * `sim` must be null or a pointer from `dhc_simulator_new` not yet freed.
 */
void dhc_simulator_free(struct DhcSimulator *sim);

/**
 * Number of input (`is_output == 0`) or output ports.
 * `sim` must be null or a live handle.
 */
size_t dhc_simulator_port_count(const struct DhcSimulator *sim, int32_t is_output);

/**
 * Copies the name of port `index` into `buf`; `needed` receives the size
 * including the NUL.
 * `sim` must be a live handle, `buf` null or valid for `cap` bytes and
 * `needed` valid for a write.
 */
enum DhcStatus dhc_simulator_port_name(const struct DhcSimulator *sim,
                                       int32_t is_output,
                                       size_t index,
                                       char *buf,
                                       size_t cap,
                                       size_t *needed);

/**
 * `sim` must be a live handle.
 */
enum DhcStatus dhc_simulator_initialize(struct DhcSimulator *sim, double t0);

/**
 * Advances over `[t, t + dt]`. Inputs and outputs follow the port order;
 * their counts must match the port counts exactly.
 * `sim` must be a live handle, `inputs` valid for `n_inputs` doubles and
 * `outputs` valid for `n_outputs` doubles.
 */
enum DhcStatus dhc_simulator_step(struct DhcSimulator *sim,
                                  double t,
                                  double dt,
                                  const double *inputs,
                                  size_t n_inputs,
                                  double *outputs,
                                  size_t n_outputs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DHCOSIM_H */
