/* C interface of the qes solver. Generated by cbindgen; do not edit. */

#ifndef QES_H
#define QES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define QES_STATUS_OK 0

// A required pointer argument was NULL.
#define QES_STATUS_NULL_ARGUMENT 1

// Invalid parameter, dimension, or index.
#define QES_STATUS_INVALID 2

// The request is outside what this build can solve.
#define QES_STATUS_UNSUPPORTED 3

// The constraints ruled every branch out.
#define QES_STATUS_NO_SOLUTION 4

// (N, M) is outside the zero-energy families M = kN, kN + 1.
#define QES_STATUS_BAD_FAMILY 5

// Internal failure (I/O, serialization, panic).
#define QES_STATUS_RUNTIME 6

// Opaque batch of solved eigenpairs, ordered by ascending energy.
typedef struct QesSolutionSet QesSolutionSet;

// Plain-data summary of one grid-oracle validation run.
typedef struct QesOracleSummary {
  // Half-width of the Dirichlet box the spectrum was computed in.
  double grid_half_width;
  // Interior grid points used.
  size_t grid_steps;
  // Index of the grid eigenvalue closest to the analytic energy.
  size_t matched_index;
  // That grid eigenvalue.
  double matched_eigenvalue;
  // Grid eigenvalue minus analytic energy.
  double matched_delta;
  // Scaled defect of the analytic eigenpair in the eigenvalue equation.
  double residual_norm;
  // Sign changes of the matched grid eigenvector.
  size_t node_count;
  // Sign changes of the analytic wavefunction on the same grid.
  size_t analytic_nodes;
  // True when probability mass leaks into the box walls.
  bool wall_warning;
} QesOracleSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Solve the block with fully specified labels `beta_1..beta_N`.
//
// `alpha` is only read for `n == 2`, where the linear coupling stays free;
// for `n >= 3` it is fixed by (N, M). On success `*out` owns the result.
//
// # Safety
// `betas` must point to `len` readable doubles and `out` to a writable
// pointer slot. The returned handle must be released with
// [`qes_solution_set_free`].
int32_t qes_solve_betas(size_t n,
                        size_t m,
                        double alpha,
                        const double *betas,
                        size_t len,
                        struct QesSolutionSet **out);

// Solve from the invariants `C_1, C_2` (higher ones family-determined) and
// realize labels with the given `beta_2`.
//
// # Safety
// `out` must point to a writable pointer slot; release the result with
// [`qes_solution_set_free`].
int32_t qes_solve_casimirs(size_t n,
                           size_t m,
                           double c1,
                           double c2,
                           double beta2,
                           struct QesSolutionSet **out);

// Solve the zero-energy family at (N, M); valid orders are M = kN and
// M = kN + 1, anything else returns `QES_STATUS_BAD_FAMILY`.
//
// # Safety
// `out` must point to a writable pointer slot; release the result with
// [`qes_solution_set_free`].
int32_t qes_solve_zero_energy(size_t n, size_t m, struct QesSolutionSet **out);

// Number of solution branches in the set (0 for NULL).
//
// # Safety
// `set` must be NULL or a live handle from a `qes_solve_*` call.
size_t qes_solution_set_len(const struct QesSolutionSet *set);

// Energy of branch `index`.
//
// # Safety
// `set` must be a live handle and `energy` a writable double.
int32_t qes_solution_energy(const struct QesSolutionSet *set, size_t index, double *energy);

// Number of block coefficients (M + 1) of branch `index`.
//
// # Safety
// `set` must be a live handle and `count` a writable size_t.
int32_t qes_solution_coefficient_count(const struct QesSolutionSet *set,
                                       size_t index,
                                       size_t *count);

// Copy the block coefficients `a_0..a_M` of branch `index` into `buf`.
//
// # Safety
// `buf` must point to at least `buf_len` writable doubles, with `buf_len`
// at least the value reported by [`qes_solution_coefficient_count`].
int32_t qes_solution_coefficients(const struct QesSolutionSet *set,
                                  size_t index,
                                  double *buf,
                                  size_t buf_len);

// Branch tag of solution `index` as a caller-freed C string.
//
// # Safety
// `out` must point to a writable pointer slot; free the string with
// [`qes_string_free`].
int32_t qes_solution_branch(const struct QesSolutionSet *set, size_t index, char **out);

// Serialize branch `index` as one JSON record line (same schema as the
// `qes solve` command) into a caller-freed C string.
//
// # Safety
// `out` must point to a writable pointer slot; free the string with
// [`qes_string_free`].
int32_t qes_solution_record_json(const struct QesSolutionSet *set, size_t index, char **out);

// Potential value `V(x)` of the problem behind branch `index`.
//
// # Safety
// `set` must be a live handle and `value` a writable double.
int32_t qes_solution_potential(const struct QesSolutionSet *set,
                               size_t index,
                               double x,
                               double *value);

// Wavefunction value `psi(x)` of branch `index` (unnormalized).
//
// # Safety
// `set` must be a live handle and `value` a writable double.
int32_t qes_solution_wavefunction(const struct QesSolutionSet *set,
                                  size_t index,
                                  double x,
                                  double *value);

// Validate branch `index` against the independent finite-difference
// oracle and fill `summary`. `grid_steps` of 0 selects the default grid.
//
// # Safety
// `set` must be a live handle and `summary` a writable
// [`QesOracleSummary`].
int32_t qes_solution_validate(const struct QesSolutionSet *set,
                              size_t index,
                              size_t grid_steps,
                              size_t levels,
                              struct QesOracleSummary *summary);

// Copy of the most recent error text on this thread, or NULL when the
// last call succeeded. The caller frees it with [`qes_string_free`].
//
// # Safety
// Always safe to call; the returned pointer must not outlive a
// [`qes_string_free`] on it.
char *qes_last_error_message(void);

// Release a solution set obtained from a `qes_solve_*` call. NULL is a
// no-op.
//
// # Safety
// `set` must be NULL or an unreleased handle from this library; it must
// not be used afterwards.
void qes_solution_set_free(struct QesSolutionSet *set);

// Release a string obtained from this library. NULL is a no-op.
//
// # Safety
// `s` must be NULL or an unreleased string from this library; it must not
// be used afterwards.
void qes_string_free(char *s);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* QES_H */
