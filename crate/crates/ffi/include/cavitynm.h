#ifndef CAVITYNM_H
#define CAVITYNM_H

#include <stddef.h>
#include <stdint.h>

// Number of doubles in a serialized two-qubit state.
#define CNM_STATE_LEN 32

typedef enum CnmStatus {
  CNM_STATUS_OK = 0,
  CNM_STATUS_NULL_POINTER = 1,
  CNM_STATUS_INVALID_ARGUMENT = 2,
  CNM_STATUS_INVALID_PARAMS = 3,
  CNM_STATUS_NOT_PSD = 4,
  CNM_STATUS_NOT_X_FORM = 5,
  CNM_STATUS_NUMERICAL = 6,
  CNM_STATUS_INVALID_SPEC = 7,
  CNM_STATUS_IO = 8,
  CNM_STATUS_PARSE = 9,
  CNM_STATUS_PANIC = 10,
} CnmStatus;

typedef enum CnmPartition {
  CNM_PARTITION_ATOM_ATOM = 0,
  CNM_PARTITION_CAVITY_CAVITY = 1,
  CNM_PARTITION_RESERVOIR_RESERVOIR = 2,
  CNM_PARTITION_ATOM_CAVITY_INTRA = 3,
  CNM_PARTITION_ATOM_RESERVOIR_INTRA = 4,
  CNM_PARTITION_CAVITY_RESERVOIR_INTRA = 5,
  CNM_PARTITION_ATOM_RESERVOIR_CROSS = 6,
} CnmPartition;

typedef enum CnmFidelityIndex {
  CNM_FIDELITY_INDEX_F1 = 1,
  CNM_FIDELITY_INDEX_F2 = 2,
  CNM_FIDELITY_INDEX_F3 = 3,
  CNM_FIDELITY_INDEX_F4 = 4,
  CNM_FIDELITY_INDEX_F5 = 5,
  CNM_FIDELITY_INDEX_F6 = 6,
} CnmFidelityIndex;

typedef enum CnmWitness {
  CNM_WITNESS_FIDELITY_DIFF = 0,
  CNM_WITNESS_TRACE_DIST_DIFF = 1,
  CNM_WITNESS_REL_ENTROPY_DIFF = 2,
} CnmWitness;

typedef enum CnmFamily {
  CNM_FAMILY_ATOM_ATOM = 0,
  CNM_FAMILY_CAVITY_CAVITY = 1,
  CNM_FAMILY_RESERVOIR_RESERVOIR = 2,
} CnmFamily;

typedef enum CnmFormat {
  CNM_FORMAT_CSV = 0,
  CNM_FORMAT_JSON = 1,
} CnmFormat;

typedef enum CnmValueKind {
  CNM_VALUE_KIND_VALUE = 0,
  CNM_VALUE_KIND_UNDEFINED = 1,
  CNM_VALUE_KIND_INFINITE = 2,
} CnmValueKind;

typedef enum CnmChshBranch {
  CNM_CHSH_BRANCH_B1 = 1,
  CNM_CHSH_BRANCH_B2 = 2,
} CnmChshBranch;

typedef enum CnmCellFlag {
  CNM_CELL_FLAG_NEGATIVE = 0,
  CNM_CELL_FLAG_NON_NEGATIVE = 1,
  CNM_CELL_FLAG_VIOLATING = 2,
  CNM_CELL_FLAG_UNDEFINED = 3,
} CnmCellFlag;

// Result of a parameter scan.
typedef struct CnmGrid CnmGrid;

// Model parameters.
typedef struct CnmParams CnmParams;

// Trajectory ensemble estimates.
typedef struct CnmTrajectory CnmTrajectory;

typedef struct CnmExcitation {
  double p;
  double q;
  double gamma_d;
} CnmExcitation;

typedef struct CnmCorrelations {
  double mutual_information;
  double classical;
  double discord;
} CnmCorrelations;

typedef struct CnmCheckpoint {
  double t;
  double est_atom;
  double est_cavity;
  double est_reservoir;
  double se_atom;
  double se_cavity;
  double se_reservoir;
} CnmCheckpoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next failing call on the same thread.
const char *cnm_last_error(void);

// Library version as a static NUL-terminated string.
const char *cnm_version(void);

// Creates parameters with coupling `v`, cavity decay `lambda_c` and
// initial amplitudes `a`, `b` (`|a|² + |b|² = 1`).
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum CnmStatus cnm_params_new(double v,
                              double lambda_c,
                              double a_re,
                              double a_im,
                              double b_re,
                              double b_im,
                              struct CnmParams **out);

// # Safety
// `params` must be null or a handle from [`cnm_params_new`] not yet freed.
void cnm_params_free(struct CnmParams *params);

// # Safety
// `params` must be a live handle and `out` writable.
enum CnmStatus cnm_excitation_probabilities(const struct CnmParams *params,
                                            double t,
                                            struct CnmExcitation *out);

// Writes the reduced state of `partition` (a [`CnmPartition`]) at time `t`
// into `out`, which must hold [`CNM_STATE_LEN`] doubles.
//
// # Safety
// `params` must be a live handle and `out` must point to 32 writable doubles.
enum CnmStatus cnm_reduced_state(const struct CnmParams *params,
                                 uint32_t partition,
                                 double t,
                                 double *out);

// Uhlmann fidelity of two serialized states.
//
// # Safety
// `rho1` and `rho2` must each point to 32 readable doubles; `out` writable.
enum CnmStatus cnm_fidelity(const double *rho1, const double *rho2, double *out);

// Closed-form fidelity `F1`..`F6` ([`CnmFidelityIndex`]) at time `t`.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum CnmStatus cnm_fidelity_closed_form(const struct CnmParams *params,
                                        uint32_t index,
                                        double t,
                                        double *out);

// Time-lag witness ([`CnmWitness`]) at `(t, tau)`. `kind` receives a
// [`CnmValueKind`]; `value` is NaN when undefined and +inf when infinite.
// `epsilon` regularizes relative entropies and is ignored otherwise.
//
// # Safety
// `params` must be a live handle; `value` and `kind` writable.
enum CnmStatus cnm_witness(const struct CnmParams *params,
                           uint32_t partition,
                           uint32_t witness,
                           double t,
                           double tau,
                           double epsilon,
                           double *value,
                           uint32_t *kind);

// CHSH-Bell value of the reduced state; `branch` receives a
// [`CnmChshBranch`] and may be null.
//
// # Safety
// `params` must be a live handle; `value` writable; `branch` null or writable.
enum CnmStatus cnm_chsh(const struct CnmParams *params,
                        uint32_t partition,
                        double t,
                        double *value,
                        uint32_t *branch);

// Mutual information, classical correlation and discord of a
// [`CnmFamily`] pair.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum CnmStatus cnm_correlations(const struct CnmParams *params,
                                uint32_t family,
                                double t,
                                struct CnmCorrelations *out);

// Runs a scan described by a JSON spec.
//
// # Safety
// `spec_json` must be a NUL-terminated string; `out` writable.
enum CnmStatus cnm_scan_json(const char *spec_json, struct CnmGrid **out);

// # Safety
// `grid` must be a live handle; `n1` and `n2` writable.
enum CnmStatus cnm_grid_shape(const struct CnmGrid *grid, uintptr_t *n1, uintptr_t *n2);

// Copies the row-major values (NaN undefined, +inf infinite) into `buf`.
//
// # Safety
// `grid` must be a live handle and `buf` must hold `len` doubles.
enum CnmStatus cnm_grid_values(const struct CnmGrid *grid, double *buf, uintptr_t len);

// Copies the per-cell [`CnmCellFlag`] codes into `buf`.
//
// # Safety
// `grid` must be a live handle and `buf` must hold `len` bytes.
enum CnmStatus cnm_grid_flags(const struct CnmGrid *grid, uint8_t *buf, uintptr_t len);

// Writes the grid to `path` as CSV or JSON ([`CnmFormat`]).
//
// # Safety
// `grid` must be a live handle; `path` a NUL-terminated string.
enum CnmStatus cnm_grid_write(const struct CnmGrid *grid, const char *path, uint32_t fmt);

// # Safety
// `grid` must be null or a handle from [`cnm_scan_json`] not yet freed.
void cnm_grid_free(struct CnmGrid *grid);

// Quantum-jump ensemble of `n_traj` trajectories sampled at the strictly
// increasing `checkpoints`. `dt <= 0` selects the default step.
//
// # Safety
// `params` must be a live handle, `checkpoints` must hold `n_checkpoints`
// doubles and `out` must be writable.
enum CnmStatus cnm_trajectory_simulate(const struct CnmParams *params,
                                       const double *checkpoints,
                                       uintptr_t n_checkpoints,
                                       uintptr_t n_traj,
                                       uint64_t seed,
                                       double dt,
                                       struct CnmTrajectory **out);

// # Safety
// `traj` must be a live handle and `len` writable.
enum CnmStatus cnm_trajectory_len(const struct CnmTrajectory *traj, uintptr_t *len);

// # Safety
// `traj` must be a live handle and `out` writable.
enum CnmStatus cnm_trajectory_get(const struct CnmTrajectory *traj,
                                  uintptr_t index,
                                  struct CnmCheckpoint *out);

// # Safety
// `traj` must be null or a handle from [`cnm_trajectory_simulate`] not yet freed.
void cnm_trajectory_free(struct CnmTrajectory *traj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAVITYNM_H */
