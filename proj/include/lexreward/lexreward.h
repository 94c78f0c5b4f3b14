/* Copyright 2026 The lexreward Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LEXREWARD_LEXREWARD_H_
#define LEXREWARD_LEXREWARD_H_

/* C interface to the lexreward engine.
 *
 * Every call returns an lxr_status; on failure lxr_last_error() holds a
 * message for the calling thread. Strings returned through char** are
 * heap-allocated and must be released with lxr_string_free. Text inputs are
 * NUL-terminated UTF-8; JSON options may be NULL for defaults.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(LEXREWARD_BUILDING)
#define LXR_API __declspec(dllexport)
#else
#define LXR_API __declspec(dllimport)
#endif
#else
#define LXR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lxr_status {
  LXR_OK = 0,
  LXR_INVALID_ARGUMENT = 1,
  LXR_PARSE = 2,
  LXR_ALIGNMENT = 3,
  LXR_UNDEFINED = 4,
  LXR_NOT_FOUND = 5,
  LXR_IO = 6,
  LXR_BIND = 7,
  LXR_INTERNAL = 8
} lxr_status;

typedef struct lxr_engine lxr_engine;
typedef struct lxr_server lxr_server;

LXR_API const char* lxr_version(void);
LXR_API const char* lxr_status_string(lxr_status status);
LXR_API const char* lxr_last_error(void);
LXR_API void lxr_string_free(char* s);

/* config_text: `key = value` lines, or NULL. LEXREWARD_<KEY> environment
 * variables are applied on top. */
LXR_API lxr_status lxr_engine_create(const char* config_text, lxr_engine** out);
LXR_API lxr_status lxr_engine_set(lxr_engine* engine, const char* key, const char* value);
LXR_API lxr_status lxr_engine_config_json(const lxr_engine* engine, char** out_json);
LXR_API void lxr_engine_destroy(lxr_engine* engine);

/* Single-example primitives. */
LXR_API lxr_status lxr_tokenize_13a(const char* text, char** out_json);
LXR_API lxr_status lxr_bleu(const lxr_engine* engine, const char* candidate,
                            const char* const* references, size_t n_references, double* out);
LXR_API lxr_status lxr_bleu_report(const lxr_engine* engine, const char* candidate,
                                   const char* const* references, size_t n_references,
                                   char** out_json);
LXR_API lxr_status lxr_rouge_l(const char* candidate, const char* const* references,
                               size_t n_references, double* out);
LXR_API lxr_status lxr_format_reward(const char* text, double* out);
/* out must hold n doubles. */
LXR_API lxr_status lxr_group_advantage(const double* rewards, size_t n, double epsilon,
                                       double* out);

/* Whole-file operations. out_text receives the primary output; out_side,
 * when non-NULL, receives secondary records (failures, dropped rows) and
 * n_failed the number of items that could not be processed. */
LXR_API lxr_status lxr_score_jsonl(const lxr_engine* engine, const char* items_jsonl,
                                   const char* options_json, char** out_text, size_t* n_failed);
LXR_API lxr_status lxr_score_pool_jsonl(const lxr_engine* engine, const char* corpus_jsonl,
                                        const char* options_json, char** out_text,
                                        char** out_side, size_t* n_failed);
LXR_API lxr_status lxr_judge(const lxr_engine* engine, const char* preferences_jsonl,
                             const char* options_json, char** out_text);
LXR_API lxr_status lxr_sweep(const lxr_engine* engine, const char* preferences_jsonl,
                             const char* options_json, char** out_text);
/* out_side, when non-null, receives the selected records as corpus JSONL in
 * selection order. */
LXR_API lxr_status lxr_select(const char* corpus_jsonl, const char* options_json, char** out_text,
                              char** out_side);
LXR_API lxr_status lxr_filter(const char* corpus_jsonl, const char* options_json, char** out_text,
                              char** out_side);
LXR_API lxr_status lxr_advantage_jsonl(const lxr_engine* engine, const char* groups_jsonl,
                                       const char* options_json, char** out_text,
                                       size_t* n_failed);
LXR_API lxr_status lxr_stats(const lxr_engine* engine, const char* texts_jsonl,
                             const char* options_json, char** out_text);
LXR_API lxr_status lxr_bench(const lxr_engine* engine, const char* options_json, char** out_text);

/* HTTP service. port 0 binds an ephemeral port; lxr_server_run blocks until
 * lxr_server_stop is called from another thread. */
LXR_API lxr_status lxr_server_create(const lxr_engine* engine, const char* host, int port,
                                     lxr_server** out);
LXR_API int lxr_server_port(const lxr_server* server);
LXR_API lxr_status lxr_server_run(lxr_server* server);
LXR_API void lxr_server_stop(lxr_server* server);
LXR_API void lxr_server_destroy(lxr_server* server);

#ifdef __cplusplus
}
#endif

#endif /* LEXREWARD_LEXREWARD_H_ */
