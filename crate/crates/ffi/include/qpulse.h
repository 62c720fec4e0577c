#ifndef QPULSE_H
#define QPULSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Zero is success.
typedef enum QpStatus {
  QP_STATUS_OK = 0,
  QP_STATUS_NULL_POINTER = 1,
  QP_STATUS_INVALID_UTF8 = 2,
  QP_STATUS_VALIDATION = 3,
  QP_STATUS_CAPACITY = 4,
  QP_STATUS_NUMERICAL = 5,
  QP_STATUS_UNDEFINED = 6,
  QP_STATUS_STEP_SIZE = 7,
  QP_STATUS_INCONSISTENCY = 8,
  QP_STATUS_DEGENERACY = 9,
  QP_STATUS_LAYOUT = 10,
  QP_STATUS_BOND_EXPLOSION = 11,
  QP_STATUS_QUADRATURE = 12,
  QP_STATUS_INVALID_STATE = 13,
  QP_STATUS_FORMAT = 14,
  QP_STATUS_IO = 15,
  QP_STATUS_OUT_OF_RANGE = 16,
  QP_STATUS_BUFFER_TOO_SMALL = 17,
  QP_STATUS_PANIC = 99,
} QpStatus;

// Run configuration.
typedef struct QpConfig QpConfig;

// One- or two-mode density matrix.
typedef struct QpDensity QpDensity;

// Matrix product state.
typedef struct QpMps QpMps;

// Finished run with its analysis.
typedef struct QpRun QpRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *qp_last_error(void);

// Library version as a static NUL-terminated string.
const char *qp_version(void);

// Parse and validate a TOML configuration.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` a writable pointer.
enum QpStatus qp_config_from_toml(const char *toml, struct QpConfig **out);

// Default configuration of a named scenario (`kerr_soliton`,
// `second_order_soliton`, `simulton`, `custom`).
//
// # Safety
// `name` must be a NUL-terminated string and `out` a writable pointer.
enum QpStatus qp_config_preset(const char *name, struct QpConfig **out);

// Serialize a configuration to TOML. The string must be released with
// [`qp_string_free`].
//
// # Safety
// `cfg` must be a live config handle and `out` a writable pointer.
enum QpStatus qp_config_to_toml(const struct QpConfig *cfg, char **out);

// # Safety
// `cfg` must be null or a handle not yet freed.
void qp_config_free(struct QpConfig *cfg);

// # Safety
// `s` must be null or a string returned by this library.
void qp_string_free(char *s);

// Run the configured scenario. Trajectories run in parallel unless the
// config disables it.
//
// # Safety
// `cfg` must be a live config handle and `out` a writable pointer.
enum QpStatus qp_run(const struct QpConfig *cfg, struct QpRun **out);

// Write the run directory (manifest, series, densities, ρ files).
//
// # Safety
// `run` must be a live run handle and `dir` a NUL-terminated path.
enum QpStatus qp_run_write(const struct QpRun *run, const char *dir);

// # Safety
// `run` must be a live run handle and `out` a writable pointer.
enum QpStatus qp_run_snapshot_count(const struct QpRun *run, uintptr_t *out);

// Scalar diagnostics of sample `k`. `wigner_negativity` receives the FH
// value; `entanglement` is NaN for single-mode runs. Any output may be null.
//
// # Safety
// `run` must be a live run handle; non-null outputs must be writable.
enum QpStatus qp_run_snapshot(const struct QpRun *run,
                              uintptr_t k,
                              double *t,
                              double *purity,
                              double *wigner_negativity,
                              double *entanglement);

// Copy of the averaged ρ_S at sample `k`.
//
// # Safety
// `run` must be a live run handle and `out` a writable pointer.
enum QpStatus qp_run_snapshot_density(const struct QpRun *run, uintptr_t k, struct QpDensity **out);

// Copy of the final MPS of trajectory 0.
//
// # Safety
// `run` must be a live run handle and `out` a writable pointer.
enum QpStatus qp_run_final_state(const struct QpRun *run, struct QpMps **out);

// # Safety
// `run` must be null or a handle not yet freed.
void qp_run_free(struct QpRun *run);

// Load an MPS snapshot file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum QpStatus qp_mps_load(const char *path, struct QpMps **out);

// # Safety
// `mps` must be a live handle and `path` a NUL-terminated string.
enum QpStatus qp_mps_save(const struct QpMps *mps, const char *path);

// # Safety
// `mps` must be a live handle and `out` a writable pointer.
enum QpStatus qp_mps_site_count(const struct QpMps *mps, uintptr_t *out);

// Local photon numbers ⟨n_m⟩ of every site.
//
// # Safety
// `mps` must be a live handle and `buf` must hold `len` doubles.
enum QpStatus qp_mps_photon_numbers(const struct QpMps *mps, double *buf, uintptr_t len);

// # Safety
// `mps` must be null or a handle not yet freed.
void qp_mps_free(struct QpMps *mps);

// Demultiplex `n_modes` supermodes and return their joint density matrix.
//
// `modes` holds `n_modes · n_sites` complex amplitudes as interleaved
// (re, im) pairs, mode-major. The input state is not modified.
// `cutoff` of 0 pads to the largest local dimension.
//
// # Safety
// `mps` must be a live handle, `modes` must hold `2·n_modes·n_sites`
// doubles and `out` must be writable.
enum QpStatus qp_demux(const struct QpMps *mps,
                       const double *modes,
                       uintptr_t n_modes,
                       uintptr_t n_sites,
                       uintptr_t cutoff,
                       struct QpDensity **out);

// Load a ρ JSON file written by a run or the CLI.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable pointer.
enum QpStatus qp_density_load(const char *path, struct QpDensity **out);

// # Safety
// `rho` must be a live handle and `out` a writable pointer.
enum QpStatus qp_density_mode_count(const struct QpDensity *rho, uintptr_t *out);

// # Safety
// `rho` must be a live handle and `out` a writable pointer.
enum QpStatus qp_density_purity(const struct QpDensity *rho, double *out);

// # Safety
// `rho` must be a live handle and `out` a writable pointer.
enum QpStatus qp_density_mean_photons(const struct QpDensity *rho, uintptr_t mode, double *out);

// Reduced state of one mode of a two-mode density matrix.
//
// # Safety
// `rho` must be a live handle and `out` a writable pointer.
enum QpStatus qp_density_partial_trace(const struct QpDensity *rho,
                                       uintptr_t keep,
                                       struct QpDensity **out);

// Doubled negative volume ∫∫(|W| − W) dx dp of a single-mode state.
//
// # Safety
// `rho` must be a live handle and `out` a writable pointer.
enum QpStatus qp_density_wigner_negativity(const struct QpDensity *rho, double *out);

// Entanglement negativity (‖ρ^T_A‖₁ − 1)/2 of a two-mode state.
//
// # Safety
// `rho` must be a live handle and `out` a writable pointer.
enum QpStatus qp_density_entanglement_negativity(const struct QpDensity *rho, double *out);

// Wigner function on a `points × points` grid over `[-half_width, half_width]²`.
// `buf[ip * points + ix]` receives W(x_ix, p_ip).
//
// # Safety
// `rho` must be a live handle and `buf` must hold `len` doubles.
enum QpStatus qp_density_wigner(const struct QpDensity *rho,
                                double half_width,
                                uintptr_t points,
                                double *buf,
                                uintptr_t len);

// # Safety
// `rho` must be null or a handle not yet freed.
void qp_density_free(struct QpDensity *rho);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPULSE_H */
