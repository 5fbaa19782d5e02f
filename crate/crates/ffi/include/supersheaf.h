#ifndef SUPERSHEAF_H
#define SUPERSHEAF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum SsStatus {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_UTF8 = 2,
  SS_STATUS_INVALID_INPUT = 3,
  SS_STATUS_UNSUPPORTED = 4,
  SS_STATUS_BUFFER_TOO_SMALL = 5,
  SS_STATUS_INTERNAL = 6,
} SsStatus;

/**
 * Opaque handle to a validated sheaf descriptor.
 */
typedef struct SsDescriptor SsDescriptor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a descriptor on `CP^{n|m}` from two twist arrays.
 *
 * # Safety
 * `even` and `odd` must point to `even_len` and `odd_len` readable values (or
 * be null when the length is 0); `out` must be writable.
 */
enum SsStatus ss_descriptor_new(uintptr_t n,
                                uintptr_t m,
                                const int64_t *even,
                                uintptr_t even_len,
                                const int64_t *odd,
                                uintptr_t odd_len,
                                struct SsDescriptor **out);

/**
 * Parses a descriptor from its JSON file format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum SsStatus ss_descriptor_from_json(const char *json, struct SsDescriptor **out);

/**
 * Releases a descriptor. Null is ignored.
 *
 * # Safety
 * `d` must come from this library and not be used afterwards.
 */
void ss_descriptor_free(struct SsDescriptor *d);

/**
 * Odd dimension `m` of the ambient superspace.
 *
 * # Safety
 * `d` must be a live descriptor and `out` writable.
 */
enum SsStatus ss_descriptor_odd_dim(const struct SsDescriptor *d, uintptr_t *out);

/**
 * `dim H^q(CP^n, O(d))`.
 *
 * # Safety
 * `out` must be writable.
 */
enum SsStatus ss_bott_dim(uintptr_t n, int64_t d, uintptr_t q, uint64_t *out);

/**
 * `dim H^0` and `dim H^1` of `End_p gr E` for `1 <= p <= m`.
 *
 * # Safety
 * `d` must be a live descriptor; `h0` and `h1` writable.
 */
enum SsStatus ss_obstruction_dims(const struct SsDescriptor *d,
                                  uintptr_t p,
                                  uint64_t *h0,
                                  uint64_t *h1);

/**
 * Čech cohomology of `gr E` on `CP^{1|m}`. `even` and `odd` receive two
 * entries each, indexed by `q`.
 *
 * # Safety
 * `d` must be a live descriptor; `even` and `odd` must hold two `uint64_t`.
 */
enum SsStatus ss_split_cohomology(const struct SsDescriptor *d, uint64_t *even, uint64_t *odd);

/**
 * Cohomology of the sheaf glued by `exp(N)`, `N` given in the cocycle JSON
 * format.
 *
 * # Safety
 * As for [`ss_split_cohomology`]; `cocycle_json` must be NUL-terminated.
 */
enum SsStatus ss_twisted_cohomology(const struct SsDescriptor *d,
                                    const char *cocycle_json,
                                    uint64_t *even,
                                    uint64_t *odd);

/**
 * Runs the built-in `CP^{1|1}` pipeline and writes its JSON report.
 * `all_ok` receives 1 when every cross-check passed.
 *
 * # Safety
 * `buf` must hold `cap` bytes; `needed` and `all_ok` may be null.
 */
enum SsStatus ss_demo_cp11(uint64_t seed,
                           char *buf,
                           uintptr_t cap,
                           uintptr_t *needed,
                           int32_t *all_ok);

/**
 * Copies the calling thread's last error message. Empty after a success.
 *
 * # Safety
 * Same buffer contract as [`ss_demo_cp11`].
 */
enum SsStatus ss_last_error(char *buf, uintptr_t cap, uintptr_t *needed);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *ss_status_name(enum SsStatus status);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SUPERSHEAF_H */
