#ifndef LACONIC_H
#define LACONIC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum DxStatus {
  DX_STATUS_OK = 0,
  DX_STATUS_NULL_ARGUMENT = 1,
  DX_STATUS_INVALID_UTF8 = 2,
  DX_STATUS_PARSE_ERROR = 3,
  DX_STATUS_SCHEMA_ERROR = 4,
  DX_STATUS_UNSUPPORTED = 5,
  DX_STATUS_IO_ERROR = 6,
  DX_STATUS_PANIC = 7,
} DxStatus;

// An instance over a mapping's source or target schema.
typedef struct DxInstance DxInstance;

// A parsed schema mapping.
typedef struct DxMapping DxMapping;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread; empty after success.
// The pointer stays valid until the next call on this thread.
const char *dx_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void dx_string_free(char *s);

// Parses a mapping written in the mapping language.
//
// # Safety
// `text` must be a NUL-terminated string and `out` a valid pointer.
enum DxStatus dx_mapping_parse(const char *text, struct DxMapping **out);

// # Safety
// `m` must be null or a handle from this library, not yet freed.
void dx_mapping_free(struct DxMapping *m);

// Renders a mapping in the mapping language.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum DxStatus dx_mapping_to_string(const struct DxMapping *m, char **out);

// Computes a logically equivalent laconic mapping. With `eliminate_certain`
// the result contains only plain source formulas.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum DxStatus dx_mapping_laconify(const struct DxMapping *m,
                                  bool eliminate_certain,
                                  struct DxMapping **out);

// SQL computing the mapping's target relations from source tables.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum DxStatus dx_mapping_emit_sql(const struct DxMapping *m, bool with_ddl, char **out);

// Checks laconicity on `samples` random source instances.
//
// # Safety
// `m` must be a live handle and `passed` a valid pointer.
enum DxStatus dx_mapping_check_laconic(const struct DxMapping *m,
                                       uintptr_t samples,
                                       uint64_t seed,
                                       bool *passed);

// Parses a source instance of `m` from a fact file.
//
// # Safety
// `m` must be a live handle, `facts` a NUL-terminated string and `out` a
// valid pointer.
enum DxStatus dx_instance_parse(const struct DxMapping *m,
                                const char *facts,
                                struct DxInstance **out);

// # Safety
// `i` must be null or a handle from this library, not yet freed.
void dx_instance_free(struct DxInstance *i);

// Renders an instance as a fact file.
//
// # Safety
// `i` must be a live handle and `out` a valid pointer.
enum DxStatus dx_instance_to_string(const struct DxInstance *i, char **out);

// Number of facts in an instance; 0 for a null handle.
//
// # Safety
// `i` must be null or a live handle.
uintptr_t dx_instance_len(const struct DxInstance *i);

// Canonical universal solution of a source instance.
//
// # Safety
// Handles must be live and `out` a valid pointer.
enum DxStatus dx_chase(const struct DxMapping *m,
                       const struct DxInstance *source,
                       struct DxInstance **out);

// Core universal solution of a source instance.
//
// # Safety
// Handles must be live and `out` a valid pointer.
enum DxStatus dx_core(const struct DxMapping *m,
                      const struct DxInstance *source,
                      struct DxInstance **out);

// Whether two instances are equal up to renaming of nulls.
//
// # Safety
// Handles must be live and `out` a valid pointer.
enum DxStatus dx_instances_isomorphic(const struct DxInstance *a,
                                      const struct DxInstance *b,
                                      bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LACONIC_H */
