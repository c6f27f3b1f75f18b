#ifndef ORTHOPLEX_H
#define ORTHOPLEX_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result codes shared by all functions.
typedef enum OrthoplexStatus {
  ORTHOPLEX_STATUS_OK = 0,
  ORTHOPLEX_STATUS_NULL_POINTER = 1,
  ORTHOPLEX_STATUS_INVALID_ARGUMENT = 2,
  ORTHOPLEX_STATUS_INVALID_POINT = 3,
  ORTHOPLEX_STATUS_DOMAIN = 4,
  ORTHOPLEX_STATUS_PARSE = 5,
  ORTHOPLEX_STATUS_BOUNDARY_MAXIMUM = 6,
  ORTHOPLEX_STATUS_TYPE_TOO_HIGH = 7,
  ORTHOPLEX_STATUS_NUMERICAL = 8,
  ORTHOPLEX_STATUS_BUFFER_TOO_SMALL = 9,
  ORTHOPLEX_STATUS_PANIC = 10,
} OrthoplexStatus;

// Opaque interaction `g`.
typedef struct OrthoplexInteraction OrthoplexInteraction;

// Opaque law of the magnetization per spin at a finite size.
typedef struct OrthoplexMixture OrthoplexMixture;

// Opaque exact sampler with its own random stream.
typedef struct OrthoplexSampler OrthoplexSampler;

// One global maximizer of `psi = g + s(., 1)`.
typedef struct OrthoplexMaximizer {
  double m_star;
  double psi;
  uint32_t type_k;
  double deriv_2k;
  double weight;
} OrthoplexMaximizer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until
// the next call into the library from the same thread.
const char *orthoplex_last_error_message(void);

// Static name of a status code; `"unknown"` for values outside the enum.
const char *orthoplex_status_name(int32_t status);

// `ln Z_n(mn, rho n)` at an interior point.
enum OrthoplexStatus orthoplex_log_z(size_t n, double m, double rho, double *out_value);

// `s_n(m, rho)`; boundary points are allowed.
enum OrthoplexStatus orthoplex_entropy_n(size_t n, double m, double rho, double *out_value);

// `s(m, rho)` at an interior point.
enum OrthoplexStatus orthoplex_limiting_entropy(double m, double rho, double *out_value);

// Matched grand-canonical parameters of an interior point.
enum OrthoplexStatus orthoplex_ensemble_map(double m, double rho, double *out_beta, double *out_mu);

// Pinsker bound on local expectation gaps at matched parameters.
enum OrthoplexStatus orthoplex_pinsker_bound(size_t n,
                                             size_t index_size,
                                             double m,
                                             double rho,
                                             double *out_value);

// Parses an interaction spec such as `cw:betaJ=1,h=0` or `expr:0.5*m^2`.
enum OrthoplexStatus orthoplex_interaction_parse(const char *spec,
                                                 struct OrthoplexInteraction **out_handle);

// `g(m)`.
enum OrthoplexStatus orthoplex_interaction_value(const struct OrthoplexInteraction *g,
                                                 double m,
                                                 double *out_value);

void orthoplex_interaction_free(struct OrthoplexInteraction *g);

// Writes up to `capacity` maximizers to `buffer` and their total count to
// `out_count`. Returns `BufferTooSmall` (with the count set) if they do not fit.
enum OrthoplexStatus orthoplex_interaction_analyze(const struct OrthoplexInteraction *g,
                                                   struct OrthoplexMaximizer *buffer,
                                                   size_t capacity,
                                                   size_t *out_count);

// `I^g(m)`; `+inf` outside `[-1, 1]`.
enum OrthoplexStatus orthoplex_rate_function(const struct OrthoplexInteraction *g,
                                             double m,
                                             double *out_value);

enum OrthoplexStatus orthoplex_mixture_new(const struct OrthoplexInteraction *g,
                                           size_t n,
                                           struct OrthoplexMixture **out_handle);

// `ln kappa_n([a, b])`.
enum OrthoplexStatus orthoplex_mixture_log_mass(const struct OrthoplexMixture *mix,
                                                double a,
                                                double b,
                                                double *out_value);

void orthoplex_mixture_free(struct OrthoplexMixture *mix);

// Sampler for the microcanonical measure at `(m, rho)`.
enum OrthoplexStatus orthoplex_sampler_microcanonical(size_t n,
                                                      double m,
                                                      double rho,
                                                      uint64_t seed,
                                                      struct OrthoplexSampler **out_handle);

// Sampler for `n` independent spins under `eta(beta, mu)`.
enum OrthoplexStatus orthoplex_sampler_grand_canonical(size_t n,
                                                       double beta,
                                                       double mu,
                                                       uint64_t seed,
                                                       struct OrthoplexSampler **out_handle);

// Draws one configuration into `buffer`, which must hold exactly `n` values.
enum OrthoplexStatus orthoplex_sampler_draw(struct OrthoplexSampler *sampler,
                                            double *buffer,
                                            size_t len);

void orthoplex_sampler_free(struct OrthoplexSampler *sampler);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORTHOPLEX_H */
