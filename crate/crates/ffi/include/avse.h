#ifndef AVSE_H
#define AVSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AvseStatus {
  AVSE_STATUS_OK = 0,
  AVSE_STATUS_NULL_ARGUMENT = 1,
  AVSE_STATUS_INVALID_ARGUMENT = 2,
  AVSE_STATUS_MISSING_INPUT = 3,
  AVSE_STATUS_INCONSISTENT_INPUT = 4,
  AVSE_STATUS_MALFORMED_INPUT = 5,
  AVSE_STATUS_IO = 6,
  AVSE_STATUS_LOCKED = 7,
  AVSE_STATUS_CONFLICT = 8,
  AVSE_STATUS_INVALID_EDIT = 9,
  AVSE_STATUS_OUT_OF_RANGE = 10,
  AVSE_STATUS_PANIC = 11,
} AvseStatus;

/**
 * Opaque project handle.
 */
typedef struct AvseProject AvseProject;

/**
 * Agreement between two boundary lists.
 */
typedef struct AvseBoundaryReport {
  double jaccard_similarity;
  size_t matched;
  size_t total_a;
  size_t total_b;
} AvseBoundaryReport;

/**
 * A time span in seconds, `[start, end)`.
 */
typedef struct AvseSpan {
  double start;
  double end;
} AvseSpan;

typedef struct AvseErrorReport {
  double precision;
  double recall;
  size_t matched;
  size_t predicted;
  size_t ground_truth;
} AvseErrorReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Description of the last failure on this thread, or NULL after a
 * success. Valid until the next library call on this thread.
 */
const char *avse_last_error_message(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void avse_string_free(char *s);

/**
 * Variance of the 4-neighbour Laplacian of an 8-bit grayscale frame.
 *
 * # Safety
 * `pixels` must point to `width * height` readable bytes, row-major.
 */
enum AvseStatus avse_focus_score(const uint8_t *pixels, size_t width, size_t height, double *out);

/**
 * Mean luminance in `[0, 1]` of an 8-bit grayscale frame, after area
 * downsampling to at most 100x100.
 *
 * # Safety
 * `pixels` must point to `width * height` readable bytes, row-major.
 */
enum AvseStatus avse_luminance(const uint8_t *pixels, size_t width, size_t height, double *out);

/**
 * Scores two sorted boundary lists (seconds) against each other.
 *
 * # Safety
 * `a` and `b` must point to `a_len` and `b_len` readable doubles.
 */
enum AvseStatus avse_score_boundaries(const double *a,
                                      size_t a_len,
                                      const double *b,
                                      size_t b_len,
                                      double tolerance,
                                      struct AvseBoundaryReport *out);

/**
 * Precision and recall of predicted error spans against labeled spans.
 *
 * # Safety
 * `predicted` and `ground_truth` must point to the given number of spans.
 */
enum AvseStatus avse_score_errors(const struct AvseSpan *predicted,
                                  size_t predicted_len,
                                  const struct AvseSpan *ground_truth,
                                  size_t ground_truth_len,
                                  double tolerance,
                                  struct AvseErrorReport *out);

/**
 * Opens and locks a project directory. `config_path` may be NULL to use
 * the project's own `config.json`.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum AvseStatus avse_project_open(const char *root,
                                  const char *config_path,
                                  struct AvseProject **out);

/**
 * Closes a project and releases its lock. NULL is ignored.
 *
 * # Safety
 * `project` must come from [`avse_project_open`] and not have been freed.
 */
void avse_project_free(struct AvseProject *project);

/**
 * Measures the frames and writes `analysis.json`.
 *
 * # Safety
 * `project` must be a live handle.
 */
enum AvseStatus avse_project_analyze(struct AvseProject *project);

/**
 * Rebuilds the script at revision 0. Earlier edits are moved aside.
 *
 * # Safety
 * `project` must be a live handle.
 */
enum AvseStatus avse_project_script(struct AvseProject *project);

/**
 * # Safety
 * `project` must be a live handle; `out` must be writable.
 */
enum AvseStatus avse_project_revision(struct AvseProject *project, uint64_t *out);

/**
 * Applies one edit given as JSON, e.g.
 * `{"kind": "delete_blocks", "targets": [3]}`.
 *
 * # Safety
 * `project` must be a live handle; `op_json` NUL-terminated.
 */
enum AvseStatus avse_project_apply_edit_json(struct AvseProject *project,
                                             uint64_t revision,
                                             const char *op_json);

/**
 * # Safety
 * `project` must be a live handle.
 */
enum AvseStatus avse_project_undo(struct AvseProject *project, uint64_t revision);

/**
 * The current script as JSON.
 *
 * # Safety
 * `project` must be a live handle; `out` receives a string to free.
 */
enum AvseStatus avse_project_script_json(struct AvseProject *project, char **out);

/**
 * The outline as a JSON array.
 *
 * # Safety
 * `project` must be a live handle; `out` receives a string to free.
 */
enum AvseStatus avse_project_outline_json(struct AvseProject *project, char **out);

/**
 * The edit decision list as JSON.
 *
 * # Safety
 * `project` must be a live handle; `out` receives a string to free.
 */
enum AvseStatus avse_project_edl_json(struct AvseProject *project, char **out);

/**
 * Search hits for `query` as a JSON array.
 *
 * # Safety
 * `project` must be a live handle; `query` NUL-terminated; `out`
 * receives a string to free.
 */
enum AvseStatus avse_project_search_json(struct AvseProject *project,
                                         const char *query,
                                         char **out);

/**
 * Object labels at `time` seconds as a JSON array, largest first.
 *
 * # Safety
 * `project` must be a live handle; `out` receives a string to free.
 */
enum AvseStatus avse_project_inspect_json(struct AvseProject *project, double time, char **out);

/**
 * Writes `edl.json` and `cutlist.txt` and returns the cut list.
 *
 * # Safety
 * `project` must be a live handle; `out` receives a string to free.
 */
enum AvseStatus avse_project_export(struct AvseProject *project, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AVSE_H */
