/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef QUAYDECK_H
#define QUAYDECK_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum QdStatus {
  QD_STATUS_OK = 0,
  QD_STATUS_NULL_POINTER = 1,
  QD_STATUS_INVALID_UTF8 = 2,
  QD_STATUS_PARSE_ERROR = 3,
  QD_STATUS_INVALID_INSTANCE = 4,
  QD_STATUS_INFEASIBLE = 5,
  QD_STATUS_INVALID_ARGUMENT = 6,
  QD_STATUS_PANIC = 7,
} QdStatus;

// Opaque instance handle.
typedef struct QdInstance QdInstance;

// Opaque solution handle.
typedef struct QdSolution QdSolution;

typedef struct QdGaParams {
  size_t population_size;
  double crossover_rate;
  double mutation_rate;
  double elite_fraction;
  size_t max_generations;
  size_t stagnation_limit;
  uint64_t seed;
  // Worker threads; 0 uses the default pool.
  size_t threads;
} QdGaParams;

typedef struct QdTiming {
  double alpha;
  double beta;
  double gamma;
} QdTiming;

typedef struct QdCost {
  uint64_t singles;
  uint64_t duals;
  uint64_t rehandles;
  double total_seconds;
} QdCost;

typedef struct QdTTest {
  double t;
  size_t df;
  double p;
  double critical;
  // NaN when either sample is constant.
  double pearson_r;
  bool significant;
} QdTTest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message on this thread, or null. Valid until the next call
// into the library from the same thread.
const char *qd_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library, freed once.
void qd_string_free(char *s);

// Parses an instance from JSON. The instance is not validated; see
// [`qd_instance_validate`].
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum QdStatus qd_instance_from_json(const char *json, struct QdInstance **out);

// Generates preset `scenario` (1..=6) with `seed`.
//
// # Safety
// `out` must be writable.
enum QdStatus qd_instance_generate(uint32_t scenario, uint64_t seed, struct QdInstance **out);

// # Safety
// `inst` must be null or a handle from this library, freed once.
void qd_instance_free(struct QdInstance *inst);

// Writes the number of violations to `count`. A nonzero count also sets
// the last error message to the violation list.
//
// # Safety
// `inst` must be a live handle; `count` must be writable.
enum QdStatus qd_instance_validate(const struct QdInstance *inst, size_t *count);

// Number of ship stacks.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum QdStatus qd_instance_stacks(const struct QdInstance *inst, size_t *out);

// # Safety
// `inst` must be a live handle; `out` must be writable. Free the string
// with [`qd_string_free`].
enum QdStatus qd_instance_to_json(const struct QdInstance *inst, char **out);

// Default search parameters.
struct QdGaParams qd_ga_params_default(void);

// Default timing: 90 s single, 170 s dual, 60 s rehandle.
struct QdTiming qd_timing_default(void);

// Cost of working the ship in the 1-based order `seq` against the
// instance's own yard. `timing` may be null for the defaults.
//
// # Safety
// `inst` must be a live handle, `seq` must point to `len` values and
// `out` must be writable.
enum QdStatus qd_evaluate(const struct QdInstance *inst,
                          const size_t *seq,
                          size_t len,
                          const struct QdTiming *timing,
                          struct QdCost *out);

// Solves with `strategy` (`greedy`, `bilevel`, `ilsrs1`, `ilsrs2` or
// `qcdc-dr-ga`). `params` and `timing` may be null for the defaults.
//
// # Safety
// `inst` must be a live handle, `strategy` a NUL-terminated string and
// `out` writable.
enum QdStatus qd_solve(const struct QdInstance *inst,
                       const char *strategy,
                       const struct QdGaParams *params,
                       const struct QdTiming *timing,
                       struct QdSolution **out);

// # Safety
// `sol` must be a live handle; `out` must be writable.
enum QdStatus qd_solution_cost(const struct QdSolution *sol, struct QdCost *out);

// Copies the 1-based unloading sequence into `buf`. `len` always receives
// the sequence length; if `cap` is too small nothing is copied and the
// call fails with `InvalidArgument`.
//
// # Safety
// `sol` must be a live handle, `buf` must hold `cap` values (or be null
// when `cap` is 0) and `len` must be writable.
enum QdStatus qd_solution_unload_seq(const struct QdSolution *sol,
                                     size_t *buf,
                                     size_t cap,
                                     size_t *len);

// # Safety
// `sol` must be a live handle; `out` must be writable. Free the string
// with [`qd_string_free`].
enum QdStatus qd_solution_to_json(const struct QdSolution *sol, char **out);

// # Safety
// `sol` must be null or a handle from this library, freed once.
void qd_solution_free(struct QdSolution *sol);

// Paired t-test on `d = b − a` over `n` index-matched observations.
//
// # Safety
// `a` and `b` must point to `n` values each; `out` must be writable.
enum QdStatus qd_paired_t_test(const double *a,
                               const double *b,
                               size_t n,
                               double alpha,
                               struct QdTTest *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUAYDECK_H */
