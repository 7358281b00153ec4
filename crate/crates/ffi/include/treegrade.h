#ifndef TREEGRADE_H
#define TREEGRADE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TgStatus {
  TG_STATUS_OK = 0,
  /**
   * A null pointer or non-UTF-8 string was passed.
   */
  TG_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Malformed input: unknown ids, bad paths, bad parameters, bad JSON.
   */
  TG_STATUS_INPUT = 2,
  /**
   * The grading failed validation.
   */
  TG_STATUS_GRADING = 3,
  /**
   * A hypothesis of the operation does not hold.
   */
  TG_STATUS_PRECONDITION = 4,
  /**
   * A cover query left the constructed ball.
   */
  TG_STATUS_BALL_TOO_SMALL = 5,
  /**
   * Internal invariant failure or panic.
   */
  TG_STATUS_INTERNAL = 6,
} TgStatus;

/**
 * A graph with a grading.
 */
typedef struct TgSpace TgSpace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a graph or `{graph, grading}` document. The grading is not
 * validated; see `tg_space_validate`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum TgStatus tg_space_from_json(const char *json, struct TgSpace **out);

/**
 * Builds a generated space from a spec such as
 * `{"name":"triangle_chain","k":2,"circumference":"3","bridge":"1","layout":"chain"}`.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum TgStatus tg_generate(const char *spec_json, struct TgSpace **out);

/**
 * Releases a space. Null is ignored.
 *
 * # Safety
 * `space` must come from this library and not be used afterwards.
 */
void tg_space_free(struct TgSpace *space);

/**
 * Vertex, edge and piece counts. Any output pointer may be null.
 *
 * # Safety
 * `space` must be a live handle; non-null outputs must be writable.
 */
enum TgStatus tg_space_counts(const struct TgSpace *space,
                              size_t *vertices,
                              size_t *edges,
                              size_t *pieces);

/**
 * `TG_STATUS_OK` if the grading is valid, `TG_STATUS_GRADING` otherwise.
 *
 * # Safety
 * `space` must be a live handle.
 */
enum TgStatus tg_space_validate(const struct TgSpace *space);

/**
 * Distance between two vertices as an exact `"p/q"` string.
 *
 * # Safety
 * `space` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_space_distance(const struct TgSpace *space, uint32_t u, uint32_t v, char **out);

/**
 * `{graph, grading}` JSON of the space.
 *
 * # Safety
 * `space` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_space_to_json(const struct TgSpace *space, char **out);

/**
 * The canonical grading as `{pieces: [...]}` JSON.
 *
 * # Safety
 * `space` must be a live handle; `out` must be writable.
 */
enum TgStatus tg_space_decompose(const struct TgSpace *space, char **out);

/**
 * Decides whether the loop given by `len` signed edge ids is essential,
 * reading its word at `base`. `details`, when not null, receives
 * `{essential, witness, word}` JSON.
 *
 * # Safety
 * `space` must be a live handle; `edges` must point to `len` values;
 * `essential` must be writable; `details` may be null.
 */
enum TgStatus tg_space_is_essential(const struct TgSpace *space,
                                    const int64_t *edges,
                                    size_t len,
                                    uint32_t base,
                                    bool *essential,
                                    char **details);

/**
 * Metric quotient keeping the `len` listed pieces, as
 * `{graph, grading, gamma, collapsed}` JSON.
 *
 * # Safety
 * `space` must be a live handle; `keep` must point to `len` values; `out`
 * must be writable.
 */
enum TgStatus tg_space_quotient(const struct TgSpace *space,
                                const uint32_t *keep,
                                size_t len,
                                char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void tg_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *tg_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *tg_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREEGRADE_H */
