#ifndef SDYM_H
#define SDYM_H

/* Generated by cbindgen from the sdym-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum SdymStatus {
  SDYM_STATUS_OK = 0,
  // A required pointer argument was null.
  SDYM_STATUS_NULL_ARGUMENT = 1,
  // Malformed input: seed JSON, encoding, or unsupported seed kind.
  SDYM_STATUS_INVALID_INPUT = 2,
  // The requested value does not exist at this point (singular locus).
  SDYM_STATUS_SINGULAR = 3,
  // A numerical check failed (symmetry probe, tail convergence, ...).
  SDYM_STATUS_NUMERICAL = 4,
  // An internal invariant was violated.
  SDYM_STATUS_PANIC = 5,
} SdymStatus;

// Opaque handle to a seed solution.
typedef struct SdymSolution SdymSolution;

// Values of the composed transformation at one point of the real slice.
typedef struct SdymGaussValues {
  double alpha_re;
  double alpha_im;
  double tau_re;
  double tau_im;
  double beta_re;
  double beta_im;
  double hermiticity_residual;
  double commutativity_residual;
} SdymGaussValues;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the library as a static string; do not free.
const char *sdym_version(void);

// Message for the most recent failure on this thread; valid until the next
// failing call on the same thread, do not free.
const char *sdym_last_error(void);

// Releases a string obtained from this library.
void sdym_string_free(char *s);

// Builds a solution from a seed description in JSON.
enum SdymStatus sdym_solution_from_seed_json(const char *json, struct SdymSolution **out);

// Builds the radial one-lump seed with parameter a.
enum SdymStatus sdym_solution_one_instanton(double a_re, double a_im, struct SdymSolution **out);

// Releases a solution handle.
void sdym_solution_free(struct SdymSolution *handle);

// Charge density of the seed itself at a point of the real slice.
enum SdymStatus sdym_initial_density(const struct SdymSolution *handle,
                                     double y_re,
                                     double y_im,
                                     double z_re,
                                     double z_im,
                                     double *out_re,
                                     double *out_im);

// Charge density after the composed transformation.
enum SdymStatus sdym_backlund_density(const struct SdymSolution *handle,
                                      double y_re,
                                      double y_im,
                                      double z_re,
                                      double z_im,
                                      double *out_re,
                                      double *out_im);

// Total transformed charge by radial quadrature (the seed must be
// radially symmetric).
enum SdymStatus sdym_total_charge(const struct SdymSolution *handle,
                                  double *out_value,
                                  double *out_error_estimate);

// Gauss arguments and consistency residuals of the composed transformation
// at a point of the real slice.
enum SdymStatus sdym_backlund_gauss_arguments(const struct SdymSolution *handle,
                                              double y_re,
                                              double y_im,
                                              double z_re,
                                              double z_im,
                                              struct SdymGaussValues *out);

// Runs the identity verification catalogue and hands back the report as a
// JSON string.  `out_all_pass` (optional) receives 1 when no evaluated
// identity failed.
enum SdymStatus sdym_verify_json(const struct SdymSolution *handle,
                                 uint32_t samples,
                                 uint32_t transform_samples,
                                 uint64_t rng_seed,
                                 int *out_all_pass,
                                 char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SDYM_H */
