#ifndef DRAAG_H
#define DRAAG_H

/* Generated by cbindgen from draag-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum DraagStatus {
  DRAAG_STATUS_OK = 0,
  /**
   * Malformed input: JSON, schema, ranges, encodings.
   */
  DRAAG_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Well-formed input outside an operation's domain.
   */
  DRAAG_STATUS_DOMAIN = 2,
  /**
   * A required pointer was null.
   */
  DRAAG_STATUS_NULL_POINTER = 3,
  /**
   * The caller's buffer is too small; the required length is reported.
   */
  DRAAG_STATUS_BUFFER_TOO_SMALL = 4,
  /**
   * Unexpected internal failure.
   */
  DRAAG_STATUS_INTERNAL = 5,
} DraagStatus;

/**
 * Opaque graph handle.
 */
typedef struct DraagGraph DraagGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *draag_version(void);

/**
 * Message of the last failure on this thread. The pointer stays valid
 * until the next failing call on the same thread.
 */
const char *draag_last_error_message(void);

/**
 * Parse a graph document `{"vertices": n, "edges": [[i,j],...]}` into a
 * handle. The caller owns the handle and must release it with
 * [`draag_graph_free`].
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DraagStatus draag_graph_parse(const char *json, struct DraagGraph **out);

/**
 * Release a handle returned by [`draag_graph_parse`]. Null is ignored.
 *
 * # Safety
 * `graph` must be a handle from this library, released at most once.
 */
void draag_graph_free(struct DraagGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle from this library.
 */
uintptr_t draag_graph_vertex_count(const struct DraagGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle from this library.
 */
uintptr_t draag_graph_edge_count(const struct DraagGraph *graph);

/**
 * Write the complete-subgraph counts `c_0..c_k` into `buf`. On success
 * `*len` is the number of coefficients written; when the buffer is too
 * small the call fails with [`DraagStatus::BufferTooSmall`] and `*len`
 * holds the required capacity.
 *
 * # Safety
 * `graph` must be a live handle; `buf` must point to `cap` writable
 * entries; `len` must be a valid pointer.
 */
enum DraagStatus draag_clique_polynomial(const struct DraagGraph *graph,
                                         uint64_t *buf,
                                         uintptr_t cap,
                                         uintptr_t *len);

/**
 * Class-membership verdict as a JSON string:
 * `{"in_GrP": bool, "witness": ..., "reason": ...}`. The caller releases
 * the string with [`draag_string_free`].
 *
 * # Safety
 * `graph` must be a live handle and `out_json` a valid pointer.
 */
enum DraagStatus draag_recognize_json(const struct DraagGraph *graph, char **out_json);

/**
 * Full analysis report as a JSON string. `z_json` may be null for the
 * trivial twist; `order` may be null for the natural generator order;
 * `sum_mode` is 0 for the calibrated default, 1 for `d`, 2 for `d+1`.
 * The caller releases the string with [`draag_string_free`].
 *
 * # Safety
 * `graph_json` must be NUL-terminated; optional pointers may be null;
 * `out_json` must be valid.
 */
enum DraagStatus draag_analyze_json(const char *graph_json,
                                    const char *z_json,
                                    const char *order,
                                    uint32_t trunc,
                                    uint32_t sum_mode,
                                    char **out_json);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and be released at most once.
 */
void draag_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DRAAG_H */
