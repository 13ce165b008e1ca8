#ifndef COOS_H
#define COOS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum CoosStatus {
  COOS_STATUS_OK = 0,
  // A required pointer argument was NULL.
  COOS_STATUS_NULL_POINTER = 1,
  // Input violates a precondition (domain error).
  COOS_STATUS_INVALID_ARGUMENT = 2,
  COOS_STATUS_NOT_FOUND = 3,
  // The cross-point function has no sign change over the interval.
  COOS_STATUS_BRACKETING = 4,
  // A file or document is malformed.
  COOS_STATUS_FORMAT = 5,
  COOS_STATUS_IO = 6,
  // A buffer passed by the caller is too small.
  COOS_STATUS_BUFFER_TOO_SMALL = 7,
  // Unexpected failure (including a caught panic).
  COOS_STATUS_INTERNAL = 8,
} CoosStatus;

// Opaque trained cooperation model.
typedef struct CoosKenn CoosKenn;

// Opaque preference model of one participant.
typedef struct CoosPreference CoosPreference;

// Opaque normalized scenario set.
typedef struct CoosScenarioSet CoosScenarioSet;

// A point on the simplex; `a + b + c = 1`.
typedef struct CoosPoint {
  double a;
  double b;
  double c;
} CoosPoint;

// Preference estimate of one participant.
typedef struct CoosEstimate {
  struct CoosPoint map_estimate;
  double credible_region_diameter;
  bool converged;
  uintptr_t responses;
} CoosEstimate;

// Scalar function callback: `f(x, user_data)`.
typedef double (*CoosScalarFn)(double x, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the calling thread's most recent failure (empty after a
// success). Never NULL.
const char *coos_last_error(void);

// Library version as a NUL-terminated string with static lifetime.
const char *coos_version(void);

// Projects three nonnegative values onto the simplex; all zeros map to the
// center.
//
// # Safety
// `values` must point to three doubles and `out` to a writable point.
enum CoosStatus coos_to_ternary(const double *values, struct CoosPoint *out_point);

// Intersection of the line through `p` holding coordinate `axis_p` constant
// with the line through `q` holding `axis_q` constant (axes 0=a, 1=b, 2=c).
// `*found` is false when the lines meet outside the simplex.
//
// # Safety
// `out_point` and `found` must be writable.
enum CoosStatus coos_constant_coordinate_intersection(struct CoosPoint p,
                                                      uint32_t axis_p,
                                                      struct CoosPoint q,
                                                      uint32_t axis_q,
                                                      struct CoosPoint *out_point,
                                                      bool *found);

// Loads a normalized scenario file (JSON Lines).
//
// # Safety
// `path` must be a NUL-terminated string; `out_set` must be writable.
enum CoosStatus coos_scenarios_load(const char *path, struct CoosScenarioSet **out_set);

// Number of scenarios in a set (0 for NULL).
//
// # Safety
// `set` must be NULL or a live handle.
uintptr_t coos_scenarios_len(const struct CoosScenarioSet *set);

// Simplex point of a scenario by id.
//
// # Safety
// `set` must be a live handle and `out_point` writable.
enum CoosStatus coos_scenarios_point(const struct CoosScenarioSet *set,
                                     uint64_t scenario_id,
                                     struct CoosPoint *out_point);

// Renders the scenario cloud as an SVG document. Release the string with
// [`coos_string_free`].
//
// # Safety
// `set` must be a live handle and `out_svg` writable.
enum CoosStatus coos_scenarios_svg(const struct CoosScenarioSet *set, char **out_svg);

// # Safety
// `set` must be NULL or a handle from [`coos_scenarios_load`], not yet freed.
void coos_scenarios_free(struct CoosScenarioSet *set);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void coos_string_free(char *s);

// New preference model with a uniform prior.
//
// # Safety
// `out_model` must be writable.
enum CoosStatus coos_preference_new(uint64_t participant_id, struct CoosPreference **out_model);

// Selects the next question. `*found` is false once every pair has been
// asked.
//
// # Safety
// Handles must be live; out-pointers writable.
enum CoosStatus coos_preference_select(const struct CoosPreference *model,
                                       const struct CoosScenarioSet *set,
                                       uint64_t seed,
                                       uint64_t *out_a,
                                       uint64_t *out_b,
                                       bool *found);

// Records that scenario `winner` (0 = a, 1 = b) was preferred.
//
// # Safety
// Handles must be live.
enum CoosStatus coos_preference_record(struct CoosPreference *model,
                                       const struct CoosScenarioSet *set,
                                       uint64_t scenario_a,
                                       uint64_t scenario_b,
                                       uint32_t winner);

// Current estimate of a preference model.
//
// # Safety
// `model` must be live and `out_estimate` writable.
enum CoosStatus coos_preference_estimate(const struct CoosPreference *model,
                                         struct CoosEstimate *out_estimate);

// # Safety
// `model` must be NULL or a handle from [`coos_preference_new`], not yet freed.
void coos_preference_free(struct CoosPreference *model);

// Loads a model document written by `coos kenn-train`.
//
// # Safety
// `path` must be a NUL-terminated string; `out_model` writable.
enum CoosStatus coos_kenn_load(const char *path, struct CoosKenn **out_model);

// Number of feature inputs (0 for NULL).
//
// # Safety
// `model` must be NULL or live.
uintptr_t coos_kenn_feature_count(const struct CoosKenn *model);

// Number of trait inputs (0 for NULL).
//
// # Safety
// `model` must be NULL or live.
uintptr_t coos_kenn_trait_count(const struct CoosKenn *model);

// Number of determinant scores (0 for NULL).
//
// # Safety
// `model` must be NULL or live.
uintptr_t coos_kenn_group_count(const struct CoosKenn *model);

// Predicted cooperation rate and raw determinant scores for one record.
// `scores` may be NULL when `scores_len` is 0; otherwise it must hold at
// least [`coos_kenn_group_count`] doubles.
//
// # Safety
// Array arguments must hold the stated number of elements.
enum CoosStatus coos_kenn_predict(const struct CoosKenn *model,
                                  const double *features,
                                  uintptr_t features_len,
                                  const double *traits,
                                  uintptr_t traits_len,
                                  double *out_rate,
                                  double *scores,
                                  uintptr_t scores_len);

// # Safety
// `model` must be NULL or a handle from [`coos_kenn_load`], not yet freed.
void coos_kenn_free(struct CoosKenn *model);

// Positionality-weighted target between a majority and a minority group and
// the nearest of `count` candidate scenarios (ties by lowest id).
//
// # Safety
// `ids` and `points` must each hold `count` elements; out-pointers writable.
enum CoosStatus coos_positionality_choice(struct CoosPoint majority,
                                          uintptr_t majority_size,
                                          struct CoosPoint minority,
                                          uintptr_t minority_size,
                                          uint32_t dims_total,
                                          uint32_t dims_respected,
                                          const uint64_t *ids,
                                          const struct CoosPoint *points,
                                          uintptr_t count,
                                          struct CoosPoint *out_target,
                                          uint64_t *out_scenario_id);

// Crossing of a utility and a norm curve on `[lo, hi]` by bisection.
// Returns `COOS_STATUS_BRACKETING` when `u - n` does not change sign.
//
// # Safety
// Callbacks must be safe to call with `user_data` for any `x` in range.
enum CoosStatus coos_cross_point(CoosScalarFn utility,
                                 CoosScalarFn norm,
                                 void *user_data,
                                 double lo,
                                 double hi,
                                 double *out_x);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COOS_H */
