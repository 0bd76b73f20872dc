#ifndef NATCOH_H
#define NATCOH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NatcohStatus {
  NATCOH_STATUS_OK = 0,
  NATCOH_STATUS_NULL_POINTER = 1,
  NATCOH_STATUS_INVALID_ARGUMENT = 2,
  NATCOH_STATUS_PARSE = 3,
  NATCOH_STATUS_SHAPE_MISMATCH = 4,
  NATCOH_STATUS_COMPOSITION_NONZERO = 5,
  NATCOH_STATUS_CHECK_FAILED = 6,
  NATCOH_STATUS_RETRIES_EXHAUSTED = 7,
  NATCOH_STATUS_MIXED_COHOMOLOGY = 8,
  NATCOH_STATUS_PANIC = 9,
} NatcohStatus;

// Opaque monad handle.
typedef struct NatcohMonad NatcohMonad;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *natcoh_version(void);

// Message for the last failed call on this thread, or NULL. Valid until the next call.
const char *natcoh_last_error(void);

// Parses a monad document. Fails with COMPOSITION_NONZERO when g∘f ≠ 0.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a writable pointer.
enum NatcohStatus natcoh_monad_from_json(const char *json, struct NatcohMonad **out);

// Serializes a monad (without certificate). Free the result with `natcoh_string_free`.
//
// # Safety
// `m` must be a live handle and `out` a writable pointer.
enum NatcohStatus natcoh_monad_to_json(const struct NatcohMonad *m, char **out);

// Searches for a monad with χ(E(x,y)) = r(xy - γ), γ = num/den. `r = 0` picks
// the default rank.
//
// # Safety
// `out` must be a writable pointer.
enum NatcohStatus natcoh_search(int64_t gamma_num,
                                int64_t gamma_den,
                                uint32_t r,
                                uint64_t seed,
                                struct NatcohMonad **out);

// # Safety
// `m` must be a live handle and `out` a writable pointer.
enum NatcohStatus natcoh_monad_rank(const struct NatcohMonad *m, int64_t *out);

// χ(E(a,b)).
//
// # Safety
// `m` must be a live handle and `out` a writable pointer.
enum NatcohStatus natcoh_monad_euler_char(const struct NatcohMonad *m,
                                          int64_t a,
                                          int64_t b,
                                          int64_t *out);

// Writes (h0, h1, h2) of E(a,b) to `out[0..3]`.
//
// # Safety
// `m` must be a live handle and `out` must point to three writable `size_t`.
enum NatcohStatus natcoh_monad_cohomology(const struct NatcohMonad *m,
                                          int64_t a,
                                          int64_t b,
                                          uintptr_t *out);

// Serre dual as a new handle.
//
// # Safety
// `m` must be a live handle and `out` a writable pointer.
enum NatcohStatus natcoh_monad_dual(const struct NatcohMonad *m, struct NatcohMonad **out);

// Runs the full certification on the default window. `passed` receives 1 or 0;
// the status is OK either way unless the input is unusable.
//
// # Safety
// `m` must be a live handle and `passed` a writable pointer.
enum NatcohStatus natcoh_monad_certify(const struct NatcohMonad *m, int32_t *passed);

// # Safety
// `m` must come from this library and not be used afterwards. NULL is ignored.
void natcoh_monad_free(struct NatcohMonad *m);

// # Safety
// `s` must come from this library and not be used afterwards. NULL is ignored.
void natcoh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NATCOH_H */
