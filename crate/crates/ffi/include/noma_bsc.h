#ifndef NOMA_BSC_H
#define NOMA_BSC_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NomaStatus {
  NOMA_STATUS_OK = 0,
  NOMA_STATUS_NULL_POINTER = 1,
  NOMA_STATUS_INVALID_ARGUMENT = 2,
  /**
   * No allocation meets the rate floor.
   */
  NOMA_STATUS_INFEASIBLE = 3,
  NOMA_STATUS_IO = 4,
  NOMA_STATUS_PANIC = 5,
} NomaStatus;

typedef enum NomaMode {
  /**
   * Tags reflect.
   */
  NOMA_MODE_WBS = 0,
  /**
   * Plain NOMA, reflection fixed at zero.
   */
  NOMA_MODE_NBS = 1,
} NomaMode;

/**
 * One channel draw.
 */
typedef struct NomaChannel NomaChannel;

/**
 * Result of one solve.
 */
typedef struct NomaReport NomaReport;

/**
 * System parameters; the power budget is in watts here.
 */
typedef struct NomaSystemParams {
  double noise_variance;
  double sic_error;
  double circuit_power;
  double p_max;
  double r_min;
  double path_loss_exp;
  size_t num_cells;
} NomaSystemParams;

/**
 * Distances in meters.
 */
typedef struct NomaLayout {
  double spacing;
  double d_near;
  double d_far;
  double d_tag;
  double d_tag_near;
  double d_tag_far;
} NomaLayout;

typedef struct NomaSolveConfig {
  double tol_dinkelbach;
  double tol_dual;
  size_t max_outer;
  size_t max_dual_iters;
  double step0;
  size_t interference_rounds;
} NomaSolveConfig;

typedef struct NomaCellAllocation {
  double power;
  double pac_near;
  double pac_far;
  double reflection;
} NomaCellAllocation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *noma_last_error(void);

struct NomaSystemParams noma_system_params_default(void);

struct NomaLayout noma_layout_default(void);

struct NomaSolveConfig noma_solve_config_default(void);

double noma_dbm_to_watts(double dbm);

/**
 * Draws the channels of `params.num_cells` cells placed by `layout`.
 *
 * # Safety
 * `params` and `layout` must point to valid structs; `out` must be writable.
 */
enum NomaStatus noma_channel_sample(const struct NomaSystemParams *params,
                                    const struct NomaLayout *layout,
                                    uint64_t seed,
                                    struct NomaChannel **out);

/**
 * Number of cells in `channel`, or 0 if it is null.
 *
 * # Safety
 * `channel` must be null or a live handle.
 */
size_t noma_channel_num_cells(const struct NomaChannel *channel);

/**
 * # Safety
 * `channel` must be null or a handle not freed before.
 */
void noma_channel_free(struct NomaChannel *channel);

/**
 * Runs the optimizer on one channel draw.
 *
 * # Safety
 * Pointer arguments must be valid; `out` must be writable.
 */
enum NomaStatus noma_solve(const struct NomaChannel *channel,
                           const struct NomaSystemParams *params,
                           const struct NomaSolveConfig *config,
                           enum NomaMode mode,
                           struct NomaReport **out);

/**
 * # Safety
 * `report` must be null or a handle not freed before.
 */
void noma_report_free(struct NomaReport *report);

/**
 * Network EE `ΣR/(ΣP + p_c)` at the returned allocation.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum NomaStatus noma_report_ee(const struct NomaReport *report, double *out);

/**
 * Sum over cells of `R_k/(P_k + p_c)`.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum NomaStatus noma_report_ee_sum_of_ratios(const struct NomaReport *report, double *out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum NomaStatus noma_report_converged(const struct NomaReport *report, bool *out);

/**
 * Whether every cell meets C1 to C6 at the returned allocation.
 *
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum NomaStatus noma_report_feasible(const struct NomaReport *report, bool *out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum NomaStatus noma_report_outer_iterations(const struct NomaReport *report, size_t *out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum NomaStatus noma_report_num_cells(const struct NomaReport *report, size_t *out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
enum NomaStatus noma_report_cell(const struct NomaReport *report,
                                 size_t cell,
                                 struct NomaCellAllocation *out);

/**
 * Copies up to `capacity` values of the per-iteration `Π` trajectory into
 * `buffer` and stores the full length in `len`. Pass a null buffer with
 * zero capacity to query the length.
 *
 * # Safety
 * `buffer` must be valid for `capacity` writes unless `capacity` is 0;
 * `len` must be writable.
 */
enum NomaStatus noma_report_trajectory(const struct NomaReport *report,
                                       double *buffer,
                                       size_t capacity,
                                       size_t *len);

/**
 * Exhaustive grid search on a single-cell channel. Writes the best
 * allocation and its EE.
 *
 * # Safety
 * Pointer arguments must be valid; `out_cell` and `out_ee` must be writable.
 */
enum NomaStatus noma_oracle(const struct NomaChannel *channel,
                            const struct NomaSystemParams *params,
                            size_t n_power,
                            size_t n_pac,
                            size_t n_phi,
                            enum NomaMode mode,
                            struct NomaCellAllocation *out_cell,
                            double *out_ee);

/**
 * Real roots of `c[0] + c[1]x + … + c[4]x⁴`, ascending, into `roots`
 * (room for four); their number goes to `count`.
 *
 * # Safety
 * `coeffs` must be valid for 5 reads, `roots` for 4 writes; `count` must be writable.
 */
enum NomaStatus noma_quartic_real_roots(const double *coeffs, double *roots, size_t *count);

/**
 * Runs the sweep described by the TOML file at `config_path` and writes
 * the CSV to `output_path`.
 *
 * # Safety
 * Both arguments must be null or NUL-terminated strings.
 */
enum NomaStatus noma_sweep_from_config(const char *config_path, const char *output_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOMA_BSC_H */
