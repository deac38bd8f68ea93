#ifndef DISCOSIM_H
#define DISCOSIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
typedef enum DsStatus {
  DS_STATUS_DS_OK = 0,
  DS_STATUS_DS_ERR_ARGUMENT = 1,
  DS_STATUS_DS_ERR_DOMAIN = 2,
  DS_STATUS_DS_ERR_ESTIMATION = 3,
  DS_STATUS_DS_ERR_CONFIG = 4,
  DS_STATUS_DS_ERR_IO = 5,
  DS_STATUS_DS_ERR_NULL_POINTER = 6,
  DS_STATUS_DS_ERR_UTF8 = 7,
  DS_STATUS_DS_ERR_PANIC = 8,
} DsStatus;

// Opaque experiment handle.
typedef struct DsConfig DsConfig;

// Opaque result-table handle.
typedef struct DsTable DsTable;

// One summary row. `is_q` is 1 for the alternative's own row, in which case
// `k` is 0.
typedef struct DsRow {
  int is_q;
  uint64_t k;
  double reject_rate;
  double cover_rate;
  double mean_ci_len;
  double mcse_reject;
  double mcse_cover;
  double n_eff_mean;
  size_t failures;
} DsRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message for this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length in bytes.
//
// # Safety
// `buf` must point to at least `len` writable bytes, or be null with
// `len == 0`.
size_t ds_last_error_message(char *buf, size_t len);

// Build the built-in benchmark for `scenario` ("rdd", "rkd" or "bunching")
// with the given master seed.
//
// # Safety
// `scenario` must be a valid NUL-terminated string and `out` a valid
// pointer.
enum DsStatus ds_benchmark_config(const char *scenario, uint64_t seed, struct DsConfig **out);

// Parse a config file's text. `has_seed != 0` overrides the config's seed
// with `seed`.
//
// # Safety
// `text` must be a valid NUL-terminated string and `out` a valid pointer.
enum DsStatus ds_config_parse(const char *text, int has_seed, uint64_t seed, struct DsConfig **out);

// Run the full rejection/coverage curve for a config.
//
// # Safety
// `config` must be a live handle from this library and `out` a valid
// pointer.
enum DsStatus ds_run_curve(const struct DsConfig *config, struct DsTable **out);

// Number of rows in a table (the k rows plus the final Q row).
//
// # Safety
// `table` must be a live handle; null yields 0.
size_t ds_table_num_rows(const struct DsTable *table);

// Copy row `index` into `out`.
//
// # Safety
// `table` must be a live handle and `out` a valid pointer.
enum DsStatus ds_table_row(const struct DsTable *table, size_t index, struct DsRow *out);

// Write the table as CSV to `path`.
//
// # Safety
// `table` must be a live handle and `path` a valid NUL-terminated string.
enum DsStatus ds_table_write_csv(const struct DsTable *table, const char *path);

// Standard normal quantile at `p` in (0, 1).
//
// # Safety
// `out` must be a valid pointer.
enum DsStatus ds_normal_quantile(double p, double *out);

// Two-sided level-`alpha` z test of `m0` against `estimate` with standard
// error `stderr`. Writes the z statistic and the 0/1 rejection flag.
//
// # Safety
// `z_out` and `reject_out` must be valid pointers.
enum DsStatus ds_wald_test(double estimate,
                           double stderr,
                           double m0,
                           double alpha,
                           double *z_out,
                           int *reject_out);

// The `1 - alpha` confidence interval dual to the z test.
//
// # Safety
// `lo_out` and `hi_out` must be valid pointers.
enum DsStatus ds_invert_ci(double estimate,
                           double stderr,
                           double alpha,
                           double *lo_out,
                           double *hi_out);

// Release a config handle. Null is a no-op.
//
// # Safety
// `config` must be a handle from this library, not yet freed.
void ds_config_free(struct DsConfig *config);

// Release a table handle. Null is a no-op.
//
// # Safety
// `table` must be a handle from this library, not yet freed.
void ds_table_free(struct DsTable *table);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISCOSIM_H */
