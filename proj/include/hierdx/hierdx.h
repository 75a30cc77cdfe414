#ifndef HIERDX_H
#define HIERDX_H

/* C interface to the hierarchical diagnosis core.
 *
 * Every function returns a status code. On failure hierdx_last_error()
 * describes the most recent error on the calling thread. Strings returned
 * through char** out parameters are owned by the caller and released with
 * hierdx_string_free(). Handles are not thread safe; callers serialize
 * access to a handle themselves. */

#include <stdint.h>

#if defined(_WIN32)
#define HIERDX_API __declspec(dllexport)
#else
#define HIERDX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hierdx_status {
  HIERDX_OK = 0,
  HIERDX_E_SYNTAX = 1,
  HIERDX_E_SCHEMA = 2,
  HIERDX_E_UNKNOWN_REFERENCE = 3,
  HIERDX_E_UNKNOWN_ELEMENT = 4,
  HIERDX_E_UNKNOWN_TESTPOINT = 5,
  HIERDX_E_UNKNOWN_CHIP_PAIR = 6,
  HIERDX_E_INVALID_DIAGRAM = 7,
  HIERDX_E_TOO_LARGE = 8,
  HIERDX_E_MISSING_INPUT = 9,
  HIERDX_E_CONE_TOO_WIDE = 10,
  HIERDX_E_NO_FAULT_OBSERVED = 11,
  HIERDX_E_AMBIGUOUS_ROOT = 12,
  HIERDX_E_EMPTY_ALTERNATIVES = 13,
  HIERDX_E_NO_CHIPS = 14,
  HIERDX_E_EXHAUSTED = 15,
  HIERDX_E_LENGTH_MISMATCH = 16,
  HIERDX_E_ORACLE_UNAVAILABLE = 17,
  HIERDX_E_ASSUMPTION_VIOLATION = 18,
  HIERDX_E_FILE_NOT_FOUND = 19,
  HIERDX_E_INVALID_ARGUMENT = 20,
  HIERDX_E_WRONG_PHASE = 21,
  HIERDX_E_NOT_FOUND = 22,
  HIERDX_E_INTERNAL = 99
} hierdx_status;

typedef struct hierdx_kb hierdx_kb;
typedef struct hierdx_session hierdx_session;

HIERDX_API const char* hierdx_version(void);
HIERDX_API const char* hierdx_last_error(void);
/* Symbolic name such as "WrongPhase". */
HIERDX_API const char* hierdx_status_name(hierdx_status status);
HIERDX_API void hierdx_string_free(char* s);

/* Knowledge bases. */
HIERDX_API hierdx_status hierdx_kb_load_file(const char* path, hierdx_kb** out);
HIERDX_API hierdx_status hierdx_kb_load_json(const char* json, hierdx_kb** out);
HIERDX_API void hierdx_kb_free(hierdx_kb* kb);
/* JSON array of {kind, node, message}; empty when the KB is consistent. */
HIERDX_API hierdx_status hierdx_kb_validate(const hierdx_kb* kb, char** diagnostics_json);
HIERDX_API hierdx_status hierdx_kb_to_json(const hierdx_kb* kb, char** out_json);

/* First meta-level estimate. request_json: {fault?, inputs?, observations?,
 * horizon?: [node ids]}. Result: X1, X2, Y1, Y2, EV_FL, EV_BFL, chosen, ... */
HIERDX_API hierdx_status hierdx_estimate(const hierdx_kb* kb, const char* request_json,
                                         char** result_json);

/* Full simulated diagnosis. request_json: {fault, inputs?, seed?,
 * repair_cost?, functional_info_filter?, alternation_cap?}. */
HIERDX_API hierdx_status hierdx_simulate(const hierdx_kb* kb, const char* request_json,
                                         char** result_json);

/* Evaluates a standalone influence diagram: expected cost and policy. */
HIERDX_API hierdx_status hierdx_diagram_eval_file(const char* path, char** result_json);
HIERDX_API hierdx_status hierdx_diagram_eval_json(const char* json, char** result_json);

/* Sessions. request_json as accepted by POST /api/sessions. */
HIERDX_API hierdx_status hierdx_session_create(const char* request_json, hierdx_session** out);
HIERDX_API hierdx_status hierdx_session_advance(hierdx_session* session);
HIERDX_API hierdx_status hierdx_session_probe_result(hierdx_session* session, const char* body_json);
HIERDX_API hierdx_status hierdx_session_action_result(hierdx_session* session, const char* body_json);
HIERDX_API hierdx_status hierdx_session_state(const hierdx_session* session, char** state_json);
/* One JSON event per line. */
HIERDX_API hierdx_status hierdx_session_transcript(const hierdx_session* session, char** jsonl);
HIERDX_API void hierdx_session_free(hierdx_session* session);

#ifdef __cplusplus
}
#endif

#endif
