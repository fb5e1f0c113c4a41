#ifndef AFFINE_ENERGY_H
#define AFFINE_ENERGY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes shared by every entry point.
typedef enum AeStatus {
  AE_STATUS_OK = 0,
  AE_STATUS_NULL_POINTER = 1,
  AE_STATUS_INVALID_UTF8 = 2,
  AE_STATUS_PARSE = 3,
  AE_STATUS_CONFIG = 4,
  AE_STATUS_DOMAIN = 5,
  AE_STATUS_NUMERICAL = 6,
  AE_STATUS_INVALID_BODY = 7,
  AE_STATUS_UNSUPPORTED = 8,
  AE_STATUS_DEGENERATE = 9,
  AE_STATUS_IO = 10,
  AE_STATUS_PANIC = 11,
} AeStatus;

typedef enum AeScheme {
  AE_SCHEME_UNIFORM_ANGLE = 0,
  AE_SCHEME_PRODUCT_GAUSS = 1,
  AE_SCHEME_MONTE_CARLO = 2,
} AeScheme;

typedef enum AeSharpKind {
  AE_SHARP_KIND_SOBOLEV = 0,
  AE_SHARP_KIND_MORREY = 1,
  AE_SHARP_KIND_GN_I = 2,
  AE_SHARP_KIND_GN_II = 3,
  AE_SHARP_KIND_LOGSOB = 4,
} AeSharpKind;

// Convex body.
typedef struct AeBody AeBody;

// Function sampled on a regular grid.
typedef struct AeFunction AeFunction;

// Direction grid on the unit sphere.
typedef struct AeSphere AeSphere;

// Energies of `f` and of its symmetric decreasing rearrangement.
typedef struct AeEnergyGap {
  double energy;
  double energy_star;
  double gap;
  double plateau_measure;
} AeEnergyGap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null. Valid until the next
// call into the library from the same thread.
const char *ae_last_error(void);

// Library version as a static string.
const char *ae_version(void);

// # Safety
// `out` must be valid for writes.
enum AeStatus ae_sphere_new(size_t n,
                            size_t resolution,
                            enum AeScheme scheme,
                            uint64_t seed,
                            struct AeSphere **out);

// # Safety
// `sphere` must come from `ae_sphere_new` and not be used afterwards.
void ae_sphere_free(struct AeSphere *sphere);

// Builds a body from its JSON spec, e.g. `{"kind":"cube","params":{"n":2}}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writes.
enum AeStatus ae_body_from_json(const char *json, struct AeBody **out);

// # Safety
// `body` must come from `ae_body_from_json` and not be used afterwards.
void ae_body_free(struct AeBody *body);

// # Safety
// Pointers must be valid.
enum AeStatus ae_body_dim(const struct AeBody *body, size_t *out);

// # Safety
// Pointers must be valid.
enum AeStatus ae_body_volume(const struct AeBody *body, double *out);

// `V(K)^{n-1} V(Pi* K) / (omega_n / omega_{n-1})^n`, at most 1.
//
// # Safety
// Pointers must be valid.
enum AeStatus ae_petty_product(const struct AeBody *body,
                               const struct AeSphere *sphere,
                               double *out);

// `V(Gamma_{lambda,p} K) / V(K) - 1`.
//
// # Safety
// Pointers must be valid.
enum AeStatus ae_busemann_petty_deficit(const struct AeBody *body,
                                        double lambda,
                                        double p,
                                        const struct AeSphere *sphere,
                                        double *out);

// Builds a gridded function from a catalog spec, e.g.
// `{"name":"gaussian","grid":{"n":2,"extent":5,"h":0.05}}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writes.
enum AeStatus ae_function_from_json(const char *json, struct AeFunction **out);

// # Safety
// `f` must come from `ae_function_from_json` and not be used afterwards.
void ae_function_free(struct AeFunction *f);

// `E_{lambda,p}(f)` for `p > 1`.
//
// # Safety
// Pointers must be valid.
enum AeStatus ae_affine_energy(const struct AeFunction *f,
                               double lambda,
                               double p,
                               const struct AeSphere *sphere,
                               double *out);

// # Safety
// Pointers must be valid.
enum AeStatus ae_polya_szego_gap(const struct AeFunction *f,
                                 double lambda,
                                 double p,
                                 const struct AeSphere *sphere,
                                 struct AeEnergyGap *out);

// Sharp constant; `alpha` is read only for the Gagliardo-Nirenberg kinds.
//
// # Safety
// `out` must be valid for writes.
enum AeStatus ae_sharp_constant(enum AeSharpKind kind,
                                size_t n,
                                double p,
                                double alpha,
                                double *out);

// Runs a scenario given as JSON text. On success `*out_json` holds the
// report array (release it with `ae_string_free`) and `*all_pass` is 1 when
// every job passed. A failing job is named in `ae_last_error()`.
//
// # Safety
// `scenario` must be a NUL-terminated string; out pointers must be valid.
enum AeStatus ae_run_scenario(const char *scenario,
                              double tolerance_scale,
                              char **out_json,
                              int32_t *all_pass);

// # Safety
// `s` must come from this library and not be used afterwards.
void ae_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AFFINE_ENERGY_H */
