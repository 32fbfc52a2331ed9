#ifndef KNOTLOCK_H
#define KNOTLOCK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum KnotlockStatus {
  KnotlockOk = 0,
  KnotlockErrNullPointer = 1,
  KnotlockErrUtf8 = 2,
  KnotlockErrInvalidArgument = 3,
  KnotlockErrDuplicatePrime = 4,
  KnotlockErrNotPrime = 5,
  KnotlockErrPrecisionBreach = 6,
  KnotlockErrNotAPowerOfAlpha = 7,
  KnotlockErrTooLarge = 8,
  KnotlockErrParse = 9,
  KnotlockErrProtocol = 10,
  KnotlockErrInternal = 11,
} KnotlockStatus;

/**
 * Opaque handle: an encoded package (N, M, alpha, beta).
 */
typedef struct KnotlockPackage KnotlockPackage;

/**
 * Opaque handle: a decoded payload of (prime, twists) entries.
 */
typedef struct KnotlockPayload KnotlockPayload;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Encode `len` strands of (prime, half-twists) with base `alpha` into a
 * package handle.
 *
 * # Safety
 * `primes` and `twists` must point to `len` readable elements; `out` must
 * be a valid writable pointer.
 */
enum KnotlockStatus knotlock_encode(const uint64_t *primes,
                                    const uint32_t *twists,
                                    uintptr_t len,
                                    uint32_t alpha,
                                    struct KnotlockPackage **out);

/**
 * # Safety
 * `pkg` must be a handle from [`knotlock_encode`] not yet freed (or NULL).
 */
void knotlock_package_free(struct KnotlockPackage *pkg);

/**
 * Decimal rendering of N. Free with [`knotlock_string_free`].
 *
 * # Safety
 * `pkg` must be a live package handle.
 */
char *knotlock_package_n(const struct KnotlockPackage *pkg);

/**
 * Total half-twist count M.
 *
 * # Safety
 * `pkg` must be a live package handle.
 */
uint32_t knotlock_package_m(const struct KnotlockPackage *pkg);

/**
 * Canonical decimal rendering of beta at contract precision. Free with
 * [`knotlock_string_free`].
 *
 * # Safety
 * `pkg` must be a live package handle.
 */
char *knotlock_package_beta(const struct KnotlockPackage *pkg);

/**
 * Significant digits carried by beta.
 *
 * # Safety
 * `pkg` must be a live package handle.
 */
uint32_t knotlock_package_beta_precision(const struct KnotlockPackage *pkg);

/**
 * Factor a decimal `N` back into (prime, twists) entries.
 *
 * # Safety
 * `n_decimal` must be a NUL-terminated string; `out` must be writable.
 */
enum KnotlockStatus knotlock_decode(const char *n_decimal,
                                    uint32_t alpha,
                                    struct KnotlockPayload **out);

/**
 * # Safety
 * `payload` must be a handle from [`knotlock_decode`] not yet freed (or NULL).
 */
void knotlock_payload_free(struct KnotlockPayload *payload);

/**
 * Number of strands in the payload.
 *
 * # Safety
 * `payload` must be a live payload handle.
 */
uintptr_t knotlock_payload_len(const struct KnotlockPayload *payload);

/**
 * Read entry `index` (ascending prime order): the prime as a decimal string
 * (free with [`knotlock_string_free`]) and its twist count.
 *
 * # Safety
 * `payload` must be a live payload handle; out-pointers must be writable.
 */
enum KnotlockStatus knotlock_payload_entry(const struct KnotlockPayload *payload,
                                           uintptr_t index,
                                           char **prime_out,
                                           uint32_t *twists_out);

/**
 * Recover N from `(alpha, beta, M)`. `beta_decimal` is the canonical wire
 * rendering (digits with an explicit decimal point) carrying exactly
 * `precision` significant digits. On success `n_out` receives a decimal
 * string (free with [`knotlock_string_free`]).
 *
 * # Safety
 * `beta_decimal` must be a NUL-terminated string; `n_out` must be writable.
 */
enum KnotlockStatus knotlock_reconstruct_n(uint32_t alpha,
                                           const char *beta_decimal,
                                           uint32_t precision,
                                           uint32_t m,
                                           char **n_out);

/**
 * Run a full in-process challenge-response session between two configs
 * (wire-grammar CONFIG documents). Writes the concatenated transcript
 * documents and sets `accepted_out` to 1 on ACCEPT, 0 otherwise.
 *
 * # Safety
 * Config strings must be NUL-terminated; out-pointers must be writable.
 */
enum KnotlockStatus knotlock_run_loopback(const char *alice_config,
                                          const char *bob_config,
                                          uint64_t seed,
                                          char **transcript_out,
                                          int32_t *accepted_out);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be a string returned by a knotlock function, not yet freed (or
 * NULL).
 */
void knotlock_string_free(char *s);

/**
 * Library version as a static string; do not free.
 */
const char *knotlock_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KNOTLOCK_H */
