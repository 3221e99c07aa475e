#ifndef D4FROB_H
#define D4FROB_H

/* Generated by cbindgen from the d4frob-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Success.
 */
#define D4FROB_OK 0

/**
 * A required pointer argument was null.
 */
#define D4FROB_ERR_NULL_ARGUMENT 1

/**
 * The target name was not valid UTF-8 or is not in the registry.
 */
#define D4FROB_ERR_UNKNOWN_TARGET 2

/**
 * The verification ran but at least one check failed (output still written).
 */
#define D4FROB_ERR_CHECKS_FAILED 3

/**
 * The truncation order was not positive or not a multiple of 1/24.
 */
#define D4FROB_ERR_INVALID_ORDER 4

/**
 * An internal invariant was violated; no output was written.
 */
#define D4FROB_ERR_INTERNAL 5

/**
 * Opaque engine handle; holds the truncation order in 24ths of a power of q.
 */
typedef struct D4FrobEngine D4FrobEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create an engine truncating all series at q^(order_num/order_den).
 * Returns null when the order is invalid (must be positive and a multiple
 * of 1/24).
 */
struct D4FrobEngine *d4frob_engine_new(int64_t order_num, int64_t order_den);

/**
 * Release an engine created by `d4frob_engine_new`. Null is ignored.
 */
void d4frob_engine_free(struct D4FrobEngine *engine);

/**
 * Release a string returned by any of the JSON entry points. Null is ignored.
 */
void d4frob_string_free(char *s);

/**
 * Expand a named series; writes a JSON object with exact rational
 * coefficient strings into `*out_json`.
 */
int d4frob_expand_json(const struct D4FrobEngine *engine, const char *series_name, char **out_json);

/**
 * Run a named verification suite ("all" for the whole registry); writes the
 * JSON report list into `*out_json`. Returns `D4FROB_ERR_CHECKS_FAILED`
 * (with the report still written) when any check fails.
 */
int d4frob_verify_json(const struct D4FrobEngine *engine, const char *suite_name, char **out_json);

/**
 * Produce a named pairing table ("j0", "j1", "duality") as a JSON object
 * with rows of exact rational or symbolic entry strings.
 */
int d4frob_table_json(const struct D4FrobEngine *engine, const char *table_name, char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* D4FROB_H */
