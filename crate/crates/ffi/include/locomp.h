#ifndef LOCOMP_H
#define LOCOMP_H

/* Generated by cbindgen from the locomp-ffi sources; do not edit. */

#include <stdbool.h>
#include <stdint.h>

/*
 Outcome of a call.
 */
typedef enum LocompStatus {
  LOCOMP_STATUS_OK = 0,
  /*
   A required pointer argument was null.
   */
  LOCOMP_STATUS_NULL_ARGUMENT = 1,
  LOCOMP_STATUS_INVALID_UTF8 = 2,
  /*
   JSON input did not parse or did not describe the expected value.
   */
  LOCOMP_STATUS_PARSE = 3,
  /*
   The space rejected the input (unknown metric, bad radius, ...).
   */
  LOCOMP_STATUS_SPACE = 4,
  /*
   The operation needs a spatial oracle the space does not have.
   */
  LOCOMP_STATUS_ORACLE_MISSING = 5,
  /*
   Internal failure; the library caught a panic.
   */
  LOCOMP_STATUS_PANIC = 6,
} LocompStatus;

/*
 Three-valued judgment.
 */
typedef enum LocompVerdict {
  LOCOMP_VERDICT_PROVED = 0,
  LOCOMP_VERDICT_REFUTED = 1,
  LOCOMP_VERDICT_UNKNOWN = 2,
} LocompVerdict;

/*
 A formal point of the localic completion of a space.
 */
typedef struct LocompPoint LocompPoint;

/*
 A generalised metric space with its oracle.
 */
typedef struct LocompSpace LocompSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static string.
 */
const char *locomp_version(void);

/*
 Message for the last failed call on this thread, or null. Valid until the
 next call on the same thread.
 */
const char *locomp_last_error(void);

/*
 # Safety
 `s` must come from this library and not have been freed.
 */
void locomp_string_free(char *s);

/*
 Builds a space from a JSON description such as `{"kind":"rational_line"}`.

 # Safety
 `kind_json` must be a NUL-terminated string; `out` must be writable.
 */
enum LocompStatus locomp_space_new(const char *kind_json, struct LocompSpace **out_space);

/*
 # Safety
 `space` must come from [`locomp_space_new`] and not have been freed.
 */
void locomp_space_free(struct LocompSpace *space);

/*
 `a ≤ b` (or `a < b` when `strict`) in the ball order.

 # Safety
 Pointers must be valid; strings NUL-terminated.
 */
enum LocompStatus locomp_ball_order(const struct LocompSpace *space,
                                    const char *a_json,
                                    const char *b_json,
                                    bool strict,
                                    uint32_t budget,
                                    enum LocompVerdict *verdict);

/*
 Inclusion of the extents of `a` and `b`.

 # Safety
 Pointers must be valid; strings NUL-terminated; `evidence` may be null.
 */
enum LocompStatus locomp_ball_subset(const struct LocompSpace *space,
                                     const char *a_json,
                                     const char *b_json,
                                     uint32_t budget,
                                     enum LocompVerdict *verdict,
                                     char **evidence);

/*
 `a ◁ U` in the localic completion; `u_json` is a JSON array of balls.
 The evidence is the certificate or an uncovered point.

 # Safety
 Pointers must be valid; strings NUL-terminated; `evidence` may be null.
 */
enum LocompStatus locomp_ball_cover(const struct LocompSpace *space,
                                    const char *a_json,
                                    const char *u_json,
                                    uint32_t budget,
                                    enum LocompVerdict *verdict,
                                    char **evidence);

/*
 `a ◁̄ U` in the uniform completion.

 # Safety
 As for [`locomp_ball_cover`].
 */
enum LocompStatus locomp_pf_cover(const struct LocompSpace *space,
                                  const char *a_json,
                                  const char *u_json,
                                  uint32_t budget,
                                  enum LocompVerdict *verdict,
                                  char **evidence);

/*
 Decides `(p, q) ◁ U` for rational intervals given as `["p","q"]`.

 # Safety
 Strings NUL-terminated; `verdict` writable; `evidence` may be null.
 */
enum LocompStatus locomp_interval_cover(const char *target_json,
                                        const char *u_json,
                                        enum LocompVerdict *verdict,
                                        char **evidence);

/*
 The formal point `√s`.

 # Safety
 `space` valid; `out_point` writable.
 */
enum LocompStatus locomp_point_sqrt(const struct LocompSpace *space,
                                    uint64_t s,
                                    struct LocompPoint **out_point);

/*
 The formal point of a carrier point given as JSON (`"7/5"`, `["0","1"]`).

 # Safety
 `space` valid; string NUL-terminated; `out_point` writable.
 */
enum LocompStatus locomp_point_element(const struct LocompSpace *space,
                                       const char *point_json,
                                       struct LocompPoint **out_point);

/*
 # Safety
 `point` must come from this library and not have been freed.
 */
void locomp_point_free(struct LocompPoint *point);

/*
 Whether the ball belongs to the formal point.

 # Safety
 Pointers valid; string NUL-terminated.
 */
enum LocompStatus locomp_point_member(const struct LocompPoint *point,
                                      const char *ball_json,
                                      uint32_t budget,
                                      enum LocompVerdict *verdict);

/*
 Upper bound at precision `n` for the distance of two points under the
 metric given as a JSON list of generator ids (null: all generators).
 Writes a rational string, or `"inf"`.

 # Safety
 Pointers valid; `metric_json` may be null; `out_bound` writable.
 */
enum LocompStatus locomp_point_dist_upper(const struct LocompPoint *p,
                                          const struct LocompPoint *q,
                                          const char *metric_json,
                                          uint32_t n,
                                          char **out_bound);

/*
 Runs a job document and writes the structured report. `exit_code`
 receives the worst verdict code (0, 1, 2, or 3 for errors).

 # Safety
 String NUL-terminated; `report_json` and `exit_code` writable.
 */
enum LocompStatus locomp_run_job(const char *job_json,
                                 uint32_t default_budget,
                                 bool replay_certificates,
                                 char **report_json,
                                 int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCOMP_H */
