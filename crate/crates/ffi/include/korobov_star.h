#ifndef KOROBOV_STAR_H
#define KOROBOV_STAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * The four randomized constructions.
 */
typedef enum KrbCase {
  KRB_CASE_RANDOM_CONTINUOUS = 0,
  KRB_CASE_FIXED_CONTINUOUS = 1,
  KRB_CASE_RANDOM_DISCRETE = 2,
  KRB_CASE_FIXED_DISCRETE = 3,
} KrbCase;

typedef enum KrbStatus {
  KRB_STATUS_OK = 0,
  KRB_STATUS_INVALID_ARGUMENT = 1,
  KRB_STATUS_CAPACITY = 2,
  KRB_STATUS_PARSE = 3,
  KRB_STATUS_IO = 4,
  KRB_STATUS_NULL_POINTER = 5,
  KRB_STATUS_PANIC = 6,
} KrbStatus;

/**
 * Prime modulus, dimension and lattice count.
 */
typedef struct KrbContext KrbContext;

/**
 * A point set: grid numerators or real coordinates.
 */
typedef struct KrbPointSet KrbPointSet;

/**
 * Closed-form bound and its ingredients.
 */
typedef struct KrbBound {
  double variance_cap;
  double log_term;
  double t_zero;
  double unrounded_bound;
  double final_bound;
  double constant;
  double rounded_constant;
} KrbBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * The pointer is valid until the next call on the same thread.
 */
const char *krb_last_error_message(void);

/**
 * Primality of `n` (`n >= 2`).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum KrbStatus krb_is_prime(uint64_t n, bool *out);

/**
 * Create a context; `num_lattices = 0` selects the default `N - 1`.
 *
 * # Safety
 * `out` must be a valid pointer; the handle is released with
 * `krb_context_free`.
 */
enum KrbStatus krb_context_new(uint64_t n_prime,
                               size_t dim,
                               uint64_t num_lattices,
                               struct KrbContext **out);

/**
 * # Safety
 * `ctx` must come from `krb_context_new` and not be freed twice. NULL is ignored.
 */
void krb_context_free(struct KrbContext *ctx);

/**
 * Write `(1, z, ..., z^{s-1}) mod N` into `out[0..len]`; `len` must equal the dimension.
 *
 * # Safety
 * `ctx` must be a live handle and `out` must hold `len` values.
 */
enum KrbStatus krb_korobov_vector(const struct KrbContext *ctx,
                                  uint64_t z,
                                  uint64_t *out,
                                  size_t len);

/**
 * The unshifted Korobov lattice with generator `z`.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
enum KrbStatus krb_pointset_generate(const struct KrbContext *ctx,
                                     uint64_t z,
                                     struct KrbPointSet **out);

/**
 * Trial `trial_index` of the seeded construction for `case`.
 *
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
enum KrbStatus krb_pointset_sample(const struct KrbContext *ctx,
                                   enum KrbCase case_,
                                   uint64_t master_seed,
                                   uint64_t trial_index,
                                   struct KrbPointSet **out);

/**
 * # Safety
 * `ps` must be a live handle and `out` a valid pointer.
 */
enum KrbStatus krb_pointset_len(const struct KrbPointSet *ps, size_t *out);

/**
 * # Safety
 * `ps` must be a live handle and `out` a valid pointer.
 */
enum KrbStatus krb_pointset_dim(const struct KrbPointSet *ps, size_t *out);

/**
 * Whether the set holds grid numerators (otherwise real coordinates).
 *
 * # Safety
 * `ps` must be a live handle and `out` a valid pointer.
 */
enum KrbStatus krb_pointset_is_grid(const struct KrbPointSet *ps, bool *out);

/**
 * Copy the real coordinates, row-major, into `out[0..len]`; `len` must be
 * `count * dim`.
 *
 * # Safety
 * `ps` must be a live handle and `out` must hold `len` values.
 */
enum KrbStatus krb_pointset_copy_coords(const struct KrbPointSet *ps, double *out, size_t len);

/**
 * # Safety
 * `ps` must come from a `krb_pointset_*` constructor and not be freed twice.
 * NULL is ignored.
 */
void krb_pointset_free(struct KrbPointSet *ps);

/**
 * Maximum of |local discrepancy| over the grid corners, and that plus `s/N`.
 *
 * # Safety
 * Handles must be live; outputs valid pointers.
 */
enum KrbStatus krb_star_disc_grid(const struct KrbPointSet *ps,
                                  const struct KrbContext *ctx,
                                  double *grid_max,
                                  double *upper_bound);

/**
 * Exact star discrepancy over the critical boxes.
 *
 * # Safety
 * `ps` must be a live handle and `out` a valid pointer.
 */
enum KrbStatus krb_star_disc_exact(const struct KrbPointSet *ps, double *out);

/**
 * # Safety
 * `ctx` must be a live handle and `out` a valid pointer.
 */
enum KrbStatus krb_theorem_bound(const struct KrbContext *ctx,
                                 enum KrbCase case_,
                                 double failure_prob,
                                 struct KrbBound *out);

/**
 * `S_N(z, k)`: 1 when `k · a(z) ≡ 0 (mod N)`, else 0.
 *
 * # Safety
 * `ctx` must be a live handle, `k` must hold `len` values, `out` valid.
 */
enum KrbStatus krb_char_sum(const struct KrbContext *ctx,
                            uint64_t z,
                            const int64_t *k,
                            size_t len,
                            uint8_t *out);

/**
 * Number of generators `r ∈ {1, ..., M}` with `k · a(r) ≡ 0 (mod N)`.
 *
 * # Safety
 * `ctx` must be a live handle, `k` must hold `len` values, `out` valid.
 */
enum KrbStatus krb_count_generator_hits(const struct KrbContext *ctx,
                                        const int64_t *k,
                                        size_t len,
                                        uint64_t *out);

/**
 * Continuous Fourier coefficient of the indicator of `[0, b)`.
 *
 * # Safety
 * `k` and `b` must hold `len` values; outputs valid.
 */
enum KrbStatus krb_cont_coeff(const int64_t *k,
                              const double *b,
                              size_t len,
                              double *re,
                              double *im);

/**
 * Discrete Fourier coefficient of the grid box with numerators `b_num`.
 *
 * # Safety
 * `k` and `b_num` must hold `len` values; outputs valid.
 */
enum KrbStatus krb_disc_coeff(uint64_t n_prime,
                              const uint64_t *k,
                              const uint32_t *b_num,
                              size_t len,
                              double *re,
                              double *im);

/**
 * Run a campaign from a JSON config; writes the JSON summary to `*out`,
 * which must be released with `krb_string_free`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum KrbStatus krb_run_campaign_json(const char *config_json, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. NULL is ignored.
 */
void krb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KOROBOV_STAR_H */
