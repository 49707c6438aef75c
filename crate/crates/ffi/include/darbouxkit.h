#ifndef DARBOUXKIT_H
#define DARBOUXKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DkStatus {
  DK_STATUS_OK = 0,
  DK_STATUS_CHECK_FAILED = 1,
  DK_STATUS_PARSE_ERROR = 2,
  DK_STATUS_NULL_ARGUMENT = 3,
  DK_STATUS_INVALID_UTF8 = 4,
  DK_STATUS_NOT_FOUND = 5,
  DK_STATUS_EVAL_ERROR = 6,
  DK_STATUS_UNKNOWN_COMMAND = 7,
} DkStatus;

// A parsed model file.
typedef struct DkModel DkModel;

// The outcome of a command run.
typedef struct DkReport DkReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread; valid until the next call.
const char *dk_last_error(void);

// # Safety
// `s` must come from this library or be null.
void dk_string_free(char *s);

// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum DkStatus dk_model_parse(const char *text, struct DkModel **out);

// # Safety
// `m` must come from [`dk_model_parse`] or be null.
void dk_model_free(struct DkModel *m);

// # Safety
// `m` must be a live model handle or null.
uintptr_t dk_model_section_count(const struct DkModel *m);

// Canonical text of the model.
//
// # Safety
// `m` must be a live model handle; `out` must be writable.
enum DkStatus dk_model_print(const struct DkModel *m, char **out);

// Value of `let name` in `[motive section]`, in normal form.
//
// # Safety
// All pointers must be valid; strings NUL-terminated.
enum DkStatus dk_model_motive_value(const struct DkModel *m,
                                    const char *section,
                                    const char *name,
                                    char **out);

// Vanishing (`phi != 0`) or nearby cycle of a built-in resolution datum.
//
// # Safety
// `spec` must be NUL-terminated; `out` must be writable.
enum DkStatus dk_vanishing_builtin(const char *spec, int32_t phi, char **out);

// Runs a command (`"darboux check"`, `"glue"`, ...) on model files.
//
// Returns `Ok`, `CheckFailed` or `ParseError` like the CLI exit codes; the
// report is produced in all three cases.
//
// # Safety
// `inputs` must point to `n_inputs` NUL-terminated paths; `out` must be writable.
enum DkStatus dk_run(const char *command_name,
                     const char *const *inputs,
                     uintptr_t n_inputs,
                     struct DkReport **out);

// # Safety
// `r` must be a live report handle or null.
int32_t dk_report_exit_code(const struct DkReport *r);

// # Safety
// `r` must be a live report handle; `out` must be writable.
enum DkStatus dk_report_json(const struct DkReport *r, char **out);

// # Safety
// `r` must come from [`dk_run`] or be null.
void dk_report_free(struct DkReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DARBOUXKIT_H */
