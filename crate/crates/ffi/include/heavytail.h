#ifndef HEAVYTAIL_H
#define HEAVYTAIL_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Largest table accepted by [`ht_stirling_new`].
#define HT_STIRLING_MAX_ROWS 2000

// Result code of every fallible call.
typedef enum HtStatus {
  HT_STATUS_OK = 0,
  // A required pointer argument was null.
  HT_STATUS_NULL_POINTER = 1,
  HT_STATUS_PARAMETER = 2,
  HT_STATUS_DOMAIN = 3,
  HT_STATUS_INPUT = 4,
  HT_STATUS_INSTABILITY = 5,
  HT_STATUS_CAPACITY = 6,
  HT_STATUS_CONFIG = 7,
  HT_STATUS_PARSE = 8,
  HT_STATUS_IO = 9,
  // An internal panic was caught at the boundary.
  HT_STATUS_PANIC = 10,
} HtStatus;

// Which exact check [`ht_stirling_check`] runs, and what its `bound` means.
typedef enum HtStirlingCheck {
  // Table against a subset-sum oracle for rows up to `bound`.
  HT_STIRLING_CHECK_ORACLE = 0,
  // Signs and diagonals of the whole table; `bound` is ignored.
  HT_STIRLING_CHECK_STRUCTURE = 1,
  // Polynomial identity at integers `-bound..=bound`.
  HT_STIRLING_CHECK_RISING_IDENTITY = 2,
  // Decomposition for every size up to `bound`.
  HT_STIRLING_CHECK_P_DECOMPOSITION = 3,
  // Product bound for every size `1..=bound`.
  HT_STIRLING_CHECK_PRODUCT_BOUND = 4,
  // Degree-four bound for rows up to `bound`.
  HT_STIRLING_CHECK_DEGREE4 = 5,
} HtStirlingCheck;

// Opaque weighted ECDF.
typedef struct HtEcdf HtEcdf;

// Opaque table of exact `s(i, j; 1)`.
typedef struct HtStirlingTable HtStirlingTable;

typedef struct HtAbelianMoments {
  double mean;
  double second_moment;
  double variance;
  // Limits as the size grows without bound.
  double mean_limit;
  double variance_limit;
} HtAbelianMoments;

// A two-sided interval. An undefined bound is NaN with its flag cleared.
typedef struct HtInterval {
  double lower;
  double upper;
  bool lower_defined;
  bool upper_defined;
  double level_lo;
  double level_hi;
} HtInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null if none. The pointer
// stays valid until the next failing call on the same thread.
const char *ht_last_error(void);

// Library version as a static NUL-terminated string.
const char *ht_version(void);

// Fills `out[0..count]` with `S(stability, skewness, scale, location)` draws
// from stream `(seed, stream)`.
enum HtStatus ht_sample_stable(double stability,
                               double skewness,
                               double scale,
                               double location,
                               uint64_t seed,
                               uint64_t stream,
                               uintptr_t count,
                               double *out);

enum HtStatus ht_sample_pareto_like(double tail_exponent,
                                    double x_min,
                                    bool transform,
                                    uint64_t seed,
                                    uint64_t stream,
                                    uintptr_t count,
                                    double *out);

// Draws from `P(k) ~ k^-exponent` on `1..=cutoff`.
enum HtStatus ht_sample_power_law_cutoff(double exponent,
                                         uint64_t cutoff,
                                         uint64_t seed,
                                         uint64_t stream,
                                         uintptr_t count,
                                         uint64_t *out);

enum HtStatus ht_sample_abelian(uint64_t size,
                                double alpha,
                                uint64_t seed,
                                uint64_t stream,
                                uintptr_t count,
                                uint64_t *out);

enum HtStatus ht_abelian_pmf(uint64_t size, double alpha, uint64_t b, double *out);

enum HtStatus ht_abelian_moments(uint64_t size, double alpha, struct HtAbelianMoments *out);

// Writes `t_1, ..., t_len` for the degree-one statistic into `out`.
enum HtStatus ht_compute_tn(const double *x,
                            const double *y,
                            uintptr_t len,
                            double mu_hat,
                            double p,
                            double *out);

// Equal-weight ECDF of `values`.
enum HtStatus ht_ecdf_from_samples(const double *values, uintptr_t len, struct HtEcdf **out);

// Logarithmic ECDF of `tn[burn_in..len]`, term `n` weighted by `1/n`.
enum HtStatus ht_ecdf_log_from_tn(const double *tn,
                                  uintptr_t len,
                                  uintptr_t burn_in,
                                  struct HtEcdf **out);

// Number of distinct support points.
enum HtStatus ht_ecdf_len(const struct HtEcdf *ecdf, uintptr_t *out);

enum HtStatus ht_ecdf_eval(const struct HtEcdf *ecdf, double t, double *out);

// Smallest support point whose cumulative weight reaches `level`.
enum HtStatus ht_ecdf_quantile(const struct HtEcdf *ecdf, double level, double *out);

// Releases an ECDF; null is ignored.
void ht_ecdf_free(struct HtEcdf *ecdf);

// Interval for the mean from given quantiles `lower_q <= upper_q` of the limit law.
enum HtStatus ht_ci_mean(const double *x,
                         const double *y,
                         uintptr_t len,
                         double lower_q,
                         double upper_q,
                         double p,
                         double level_lo,
                         double level_hi,
                         struct HtInterval *out);

// Maps a mean interval through `mu -> 1 - 1/mu`.
enum HtStatus ht_ci_alpha(const struct HtInterval *mean, struct HtInterval *out);

// Normal-approximation interval for the mean of `x`.
enum HtStatus ht_clt_ci(const double *x,
                        uintptr_t len,
                        double level_lo,
                        double level_hi,
                        struct HtInterval *out);

// Full p-stable interval: quantiles of the logarithmic ECDF averaged over
// `permutations` orderings of the weights (the first is the given order).
enum HtStatus ht_pstable_ci(const double *x,
                            const double *y,
                            uintptr_t len,
                            double mu_hat,
                            double p,
                            uintptr_t burn_in,
                            uintptr_t permutations,
                            uint64_t seed,
                            double level_lo,
                            double level_hi,
                            struct HtInterval *out);

enum HtStatus ht_stirling_new(uintptr_t i_max, struct HtStirlingTable **out);

void ht_stirling_free(struct HtStirlingTable *table);

// Writes `s(i, j; 1)` as a decimal string; release it with [`ht_string_free`].
enum HtStatus ht_stirling_get(const struct HtStirlingTable *table,
                              uintptr_t i,
                              uintptr_t j,
                              char **out);

// Releases a string returned by this library; null is ignored.
void ht_string_free(char *s);

enum HtStatus ht_stirling_check(const struct HtStirlingTable *table,
                                enum HtStirlingCheck check,
                                uint64_t bound,
                                uint64_t *out_cases,
                                bool *out_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEAVYTAIL_H */
