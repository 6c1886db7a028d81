#ifndef BALLNORM_H
#define BALLNORM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define BN_FAMILY_WEIERSTRASS 0

#define BN_FAMILY_BAND_BUMP 1

#define BN_FAMILY_POWER_SPECTRUM 2

#define BN_FAMILY_SMOOTH_REFERENCE 3

#define BN_BODY_BALL 0

#define BN_BODY_CUBE 1

#define BN_SPACE_BESOV 0

#define BN_SPACE_TRIEBEL_LIZORKIN 1

#define BN_METHOD_CLASSICAL 0

#define BN_METHOD_BALL 1

#define BN_MULTIPLIER_BALL_HAT 0

#define BN_MULTIPLIER_A_ELL 1

#define BN_MULTIPLIER_M_ELL 2

/*
 Result of every fallible call.
 */
typedef enum BnStatus {
  BN_STATUS_OK = 0,
  BN_STATUS_NULL_POINTER = 1,
  BN_STATUS_INVALID_GRID = 2,
  BN_STATUS_MALFORMED_FIELD = 3,
  BN_STATUS_INVALID_PARAMETER = 4,
  BN_STATUS_RADIUS_OUT_OF_RANGE = 5,
  BN_STATUS_QUADRATURE_TOO_COARSE = 6,
  BN_STATUS_MULTIPLIER_UNDEFINED = 7,
  BN_STATUS_INVARIANT_VIOLATION = 8,
  BN_STATUS_INSUFFICIENT_SCALES = 9,
  BN_STATUS_NON_FINITE = 10,
  BN_STATUS_FORMAT = 11,
  BN_STATUS_IO = 12,
  BN_STATUS_PANIC = 13,
} BnStatus;

/*
 Opaque sampled field.
 */
typedef struct BnField BnField;

/*
 Test-function description for `bn_generate`.
 */
typedef struct BnFunctionSpec {
  /*
   One of the `BN_FAMILY_*` constants.
   */
  uint32_t family;
  double alpha;
  /*
   Top lacunary level; negative ties it to `log2(N/2)`.
   */
  int32_t levels;
  uint32_t k0;
  uint64_t seed;
  /*
   Largest `|m|` of the power spectrum; 0 means `N/2 - 1`.
   */
  uint64_t band_cap;
  uint32_t dim;
  uint32_t samples_per_axis;
} BnFunctionSpec;

/*
 Norm parameters for `bn_norm`. Pass `INFINITY` for an infinite exponent.
 */
typedef struct BnNormParams {
  /*
   One of the `BN_SPACE_*` constants.
   */
  uint32_t space;
  /*
   One of the `BN_METHOD_*` constants.
   */
  uint32_t method;
  bool homogeneous;
  double alpha;
  double p;
  double q;
  uint32_t ell;
  /*
   One of the `BN_BODY_*` constants.
   */
  uint32_t body;
  /*
   When false the grid's default scale range is used.
   */
  bool has_range;
  int32_t k_min;
  int32_t k_max;
  /*
   Centre stride of the `p = INFINITY` Triebel-Lizorkin sweep; 0 means 1.
   */
  uint32_t stride;
} BnNormParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *bn_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *bn_version(void);

/*
 Build a real field from `len = N^dim` samples in row-major order.

 # Safety
 `values` must point to `len` readable doubles; `out` must be writable.
 */
enum BnStatus bn_field_from_real(uint32_t dim,
                                 uint32_t samples_per_axis,
                                 const double *values,
                                 uintptr_t len,
                                 struct BnField **out);

/*
 Release a handle. Null is ignored.

 # Safety
 `field` must come from this library and not be used afterwards.
 */
void bn_field_free(struct BnField *field);

/*
 Deep copy.

 # Safety
 `field` must be a live handle; `out` must be writable.
 */
enum BnStatus bn_field_clone(const struct BnField *field, struct BnField **out);

/*
 Grid shape of a field.

 # Safety
 `field` must be a live handle; `dim` and `samples_per_axis` must be writable.
 */
enum BnStatus bn_field_shape(const struct BnField *field,
                             uint32_t *dim,
                             uint32_t *samples_per_axis);

/*
 Copy the real parts into `out`, which must hold exactly `N^dim` doubles.

 # Safety
 `field` must be a live handle; `out` must point to `len` writable doubles.
 */
enum BnStatus bn_field_real_parts(const struct BnField *field, double *out, uintptr_t len);

/*
 Realise a test function.

 # Safety
 `spec` must be readable; `out` must be writable.
 */
enum BnStatus bn_generate(const struct BnFunctionSpec *spec, struct BnField **out);

/*
 `f - B_{ℓ,t} f` through the `A_ℓ` multiplier.

 # Safety
 `field` must be a live handle; `out` must be writable.
 */
enum BnStatus bn_ball_difference(const struct BnField *field,
                                 uint32_t ell,
                                 double t,
                                 uint32_t body,
                                 struct BnField **out);

/*
 The order-`2ℓ` average `B_{ℓ,t} f`.

 # Safety
 `field` must be a live handle; `out` must be writable.
 */
enum BnStatus bn_higher_average(const struct BnField *field,
                                uint32_t ell,
                                double t,
                                uint32_t body,
                                struct BnField **out);

/*
 Dyadic band piece `φ_{2^{-j}} * f`.

 # Safety
 `field` must be a live handle; `out` must be writable.
 */
enum BnStatus bn_band_project(const struct BnField *field, int32_t j, struct BnField **out);

/*
 Aggregate norm value.

 # Safety
 `field` must be a live handle; `params` readable; `out` writable.
 */
enum BnStatus bn_norm(const struct BnField *field, const struct BnNormParams *params, double *out);

/*
 Radial symbol value at `s` (`BN_MULTIPLIER_*`), with a quadrature rule
 sized to the oscillation.

 # Safety
 `out` must be writable.
 */
enum BnStatus bn_multiplier(uint32_t kind, uint32_t ell, uint32_t dim, double s, double *out);

/*
 Write the binary field format.

 # Safety
 `field` must be a live handle; `path` a NUL-terminated string.
 */
enum BnStatus bn_field_write(const struct BnField *field, const char *path);

/*
 Read the binary field format.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum BnStatus bn_field_read(const char *path, struct BnField **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BALLNORM_H */
