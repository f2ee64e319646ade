/* C interface of the semisobolev library. Generated at build time; do not edit. */

#ifndef SEMISOBOLEV_H
#define SEMISOBOLEV_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status code of every fallible call.
typedef enum SsStatus {
  SS_STATUS_OK = 0,
  // A required pointer argument was null.
  SS_STATUS_NULL_POINTER = 1,
  // An argument was outside its domain (including non-UTF-8 strings).
  SS_STATUS_INVALID_ARGUMENT = 2,
  // A configuration key or value was rejected.
  SS_STATUS_CONFIG = 3,
  // A solver did not reach its tolerance.  Result handles are still written.
  SS_STATUS_NO_CONVERGENCE = 4,
  // File-system or serialization failure.
  SS_STATUS_IO = 5,
  // A caller-provided buffer is too small.
  SS_STATUS_BUFFER_TOO_SMALL = 6,
  // An internal panic was caught.
  SS_STATUS_PANIC = 7,
} SsStatus;

// A validated run configuration.
typedef struct SsConfig SsConfig;

// The minimizer of one solve.
typedef struct SsSolution SsSolution;

// Scalar summary of a solve.
typedef struct SsSolveSummary {
  // Minimal quotient.
  double lambda;
  // Relative Euler–Lagrange residual.
  double residual;
  size_t iterations;
  bool converged;
  // Lattice nodes (length of the value arrays).
  size_t nodes;
  // Space dimension (coordinates per node).
  size_t dim;
  double h;
  double p;
} SsSolveSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static nul-terminated string.
const char *ss_version(void);

// Message of the last failed call on this thread, or null.  The pointer is
// valid until the next call into this library on the same thread.
const char *ss_last_error_message(void);

// Release a string returned by this library.
//
// # Safety
// `s` is null or a pointer returned by this library and not yet freed.
void ss_string_free(char *s);

// Half-line Robin constant `λ_c(p)` for `|c| < 1`.
//
// # Safety
// `out` is valid for a write of one `double`.
enum SsStatus ss_lambda_c(double c, double p, double *out);

// Whole-line constant `λ(ℝ, p)`, the `c → 1` limit of [`ss_lambda_c`].
//
// # Safety
// `out` is valid for a write of one `double`.
enum SsStatus ss_soliton_line(double p, double *out);

// Bottom of the spectrum of the linear half-line Robin operator.
double ss_linear_eigenvalue(double c);

// The de Gennes constant `Θ₀`.
//
// # Safety
// `out` is valid for a write of one `double`.
enum SsStatus ss_de_gennes_constant(double *out);

// Parse configuration text (`key = value` lines) into a new handle.
//
// # Safety
// `text` is a nul-terminated string; `out` is valid for a pointer write.
enum SsStatus ss_config_parse(const char *text, struct SsConfig **out);

// Load a configuration file into a new handle.
//
// # Safety
// `path` is a nul-terminated string; `out` is valid for a pointer write.
enum SsStatus ss_config_load(const char *path, struct SsConfig **out);

// Set one key and re-validate.  On failure the handle is unchanged.
//
// # Safety
// `config` is a live handle; `key` and `value` are nul-terminated strings.
enum SsStatus ss_config_set(struct SsConfig *config, const char *key, const char *value);

// Resolved configuration as JSON (`key → value`), released with [`ss_string_free`].
//
// # Safety
// `config` is a live handle; `out` is valid for a pointer write.
enum SsStatus ss_config_to_json(const struct SsConfig *config, char **out);

// Release a configuration handle.
//
// # Safety
// `config` is null or a handle from this library, not yet freed.
void ss_config_free(struct SsConfig *config);

// Minimize the quotient of the configured geometry (`h` and `p` must be set).
// Returns [`SsStatus::NoConvergence`] when the residual tolerance was not
// met; the solution handle is written in that case too.
//
// # Safety
// `config` is a live handle; `out` is valid for a pointer write.
enum SsStatus ss_solve(const struct SsConfig *config, struct SsSolution **out);

// Scalar summary of a solution.
//
// # Safety
// `solution` is a live handle; `out` is valid for a write.
enum SsStatus ss_solution_summary(const struct SsSolution *solution, struct SsSolveSummary *out);

// Copy the minimizer into `re[0..len)` and `im[0..len)`; `len` must be at
// least the node count.  Nodes outside the domain hold zero.
//
// # Safety
// `solution` is a live handle; `re` and `im` are valid for `len` writes.
enum SsStatus ss_solution_values(const struct SsSolution *solution,
                                 double *re,
                                 double *im,
                                 size_t len);

// Copy node coordinates, row-major `nodes × dim`, into `xs[0..len)`.
//
// # Safety
// `solution` is a live handle; `xs` is valid for `len` writes.
enum SsStatus ss_solution_coords(const struct SsSolution *solution, double *xs, size_t len);

// Solution report as JSON (resolved config, scalars, grid diagnostics),
// released with [`ss_string_free`].
//
// # Safety
// `solution` is a live handle; `out` is valid for a pointer write.
enum SsStatus ss_solution_to_json(const struct SsSolution *solution, char **out);

// Release a solution handle.
//
// # Safety
// `solution` is null or a handle from this library, not yet freed.
void ss_solution_free(struct SsSolution *solution);

// Run the two-scale partition checks; the JSON report is released with
// [`ss_string_free`].
//
// # Safety
// `out` is valid for a pointer write.
enum SsStatus ss_partition_check(double alpha,
                                 double rho,
                                 double h,
                                 size_t samples,
                                 uint64_t seed,
                                 char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMISOBOLEV_H */
