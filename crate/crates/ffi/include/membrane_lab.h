#ifndef MEMBRANE_LAB_H
#define MEMBRANE_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Termination cause of a run.
typedef enum MlRunStatus {
  // Reached the final time.
  ML_RUN_STATUS_COMPLETED = 0,
  // The time-like condition failed.
  ML_RUN_STATUS_BREAKDOWN = 1,
  // The solution reached the outer boundary.
  ML_RUN_STATUS_BOUNDARY_TOUCHED = 2,
} MlRunStatus;

// Result of a call.
typedef enum MlStatus {
  // Success.
  ML_STATUS_OK = 0,
  // A required pointer was null.
  ML_STATUS_NULL_POINTER = 1,
  // Invalid configuration, key, value or argument.
  ML_STATUS_CONFIG = 2,
  // A run broke down.
  ML_STATUS_BREAKDOWN = 3,
  // A hard invariant or study assertion failed.
  ML_STATUS_VIOLATION = 4,
  // Reading or writing files failed.
  ML_STATUS_IO = 5,
  // A caller buffer is too small.
  ML_STATUS_BUFFER_TOO_SMALL = 6,
  // An index is out of range.
  ML_STATUS_OUT_OF_RANGE = 7,
  // An internal panic was caught.
  ML_STATUS_PANIC = 8,
} MlStatus;

// Opaque run configuration.
typedef struct MlConfig MlConfig;

// Opaque finished run: final state, snapshot times and energies.
typedef struct MlRun MlRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` as a NUL-terminated string.
//
// Returns the message length without the terminator; nothing is written when `buf` is
// null or `len` is too small.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t ml_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *ml_version(void);

// Creates the default configuration of a subcommand such as `"simulate"`.
//
// # Safety
// `command` must be a NUL-terminated string and `out` a valid pointer.
enum MlStatus ml_config_new(const char *command, struct MlConfig **out);

// Applies one `key=value` setting, as with `--override`.
//
// # Safety
// `config` must come from [`ml_config_new`] and `setting` be a NUL-terminated string.
enum MlStatus ml_config_set(struct MlConfig *config, const char *setting);

// Destroys a configuration; null is ignored.
//
// # Safety
// `config` must be null or come from [`ml_config_new`], and not be used afterwards.
void ml_config_free(struct MlConfig *config);

// Runs the configured subcommand, writing its outputs to `output.dir`.
//
// # Safety
// `config` must come from [`ml_config_new`].
enum MlStatus ml_execute(const struct MlConfig *config);

// Evolves the configured data in memory. A breakdown still yields a run handle whose
// status reports it.
//
// # Safety
// `config` must come from [`ml_config_new`] and `out` be a valid pointer.
enum MlStatus ml_simulate(const struct MlConfig *config, struct MlRun **out);

// Termination cause of a run; a null handle reads as a breakdown.
//
// # Safety
// `run` must be null or come from [`ml_simulate`].
enum MlRunStatus ml_run_status(const struct MlRun *run);

// Number of grid nodes of a run, zero for null.
//
// # Safety
// `run` must be null or come from [`ml_simulate`].
size_t ml_run_nodes(const struct MlRun *run);

// Number of snapshots of a run, zero for null.
//
// # Safety
// `run` must be null or come from [`ml_simulate`].
size_t ml_run_snapshots(const struct MlRun *run);

// Copies `φ` (or `φ_t` when `velocity` is nonzero) of the last snapshot into `buf`.
//
// # Safety
// `run` must come from [`ml_simulate`] and `buf` be valid for `len` doubles.
enum MlStatus ml_run_final_field(const struct MlRun *run,
                                 int32_t velocity,
                                 double *buf,
                                 size_t len);

// Time and conserved energy of snapshot `index`.
//
// # Safety
// `run` must come from [`ml_simulate`]; `t` and `energy` must be valid pointers.
enum MlStatus ml_run_energy(const struct MlRun *run, size_t index, double *t, double *energy);

// Destroys a run; null is ignored.
//
// # Safety
// `run` must be null or come from [`ml_simulate`], and not be used afterwards.
void ml_run_free(struct MlRun *run);

// Bessel function `J₀(x)` for `0 ≤ x ≤ 200`.
//
// # Safety
// `out` must be a valid pointer.
enum MlStatus ml_bessel_j0(double x, double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MEMBRANE_LAB_H */
