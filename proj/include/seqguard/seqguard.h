// Copyright 2026 The SeqGuard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* SeqGuard C API.
 *
 * All functions return an sg_status. On failure, sg_last_error() returns a
 * message for the calling thread, valid until its next API call. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with sg_string_free. Handles are immutable once created and may
 * be shared across threads; each must be released with its _free function.
 * Corpus, pattern and knowledge base handles keep their taxonomy alive. */
#ifndef SEQGUARD_SEQGUARD_H
#define SEQGUARD_SEQGUARD_H

#include <stddef.h>

#if defined(_WIN32)
#define SG_API __declspec(dllexport)
#else
#define SG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sg_status {
  SG_OK = 0,
  SG_ERR_INVALID_ARGUMENT = 1,
  SG_ERR_IO = 2,
  SG_ERR_PARSE = 3,
  SG_ERR_VALIDATION = 4,
  SG_ERR_PROVIDER = 5,
  SG_ERR_DIMENSION_MISMATCH = 6,
  SG_ERR_ALREADY_EXISTS = 7,
  SG_ERR_INTERNAL = 8
} sg_status;

typedef enum sg_format { SG_FORMAT_JSON = 0, SG_FORMAT_TEXT = 1 } sg_format;

typedef struct sg_taxonomy sg_taxonomy;
typedef struct sg_corpus sg_corpus;
typedef struct sg_patterns sg_patterns;
typedef struct sg_providers sg_providers;
typedef struct sg_kb sg_kb;

SG_API const char* sg_version(void);
SG_API const char* sg_last_error(void);
SG_API const char* sg_status_name(sg_status status);
SG_API void sg_string_free(char* s);

/* Taxonomy */
SG_API sg_status sg_taxonomy_seed(sg_taxonomy** out);
SG_API sg_status sg_taxonomy_load_file(const char* path, sg_taxonomy** out);
SG_API sg_status sg_taxonomy_to_json(const sg_taxonomy* t, char** out);
SG_API void sg_taxonomy_free(sg_taxonomy* t);

/* Corpus (JSONL of labelled action sequences) */
SG_API sg_status sg_corpus_load_file(const sg_taxonomy* t, const char* path, sg_corpus** out);
SG_API size_t sg_corpus_size(const sg_corpus* c);
SG_API void sg_corpus_free(sg_corpus* c);

/* Mining. config_json may be NULL or an object with any of
 * "supports" (descending integers), "tau" and "min_pattern_len". */
SG_API sg_status sg_mine(const sg_corpus* c, const char* config_json, sg_patterns** out);
SG_API sg_status sg_patterns_load_file(const sg_taxonomy* t, const char* path, sg_patterns** out);
/* Canonical pattern file text. */
SG_API sg_status sg_patterns_to_json(const sg_patterns* p, char** out);
/* {"n_det", "n_just", "n_opt", "coverage_total", ...} */
SG_API sg_status sg_patterns_stats_json(const sg_patterns* p, char** out);
SG_API size_t sg_patterns_count(const sg_patterns* p);
SG_API void sg_patterns_free(sg_patterns* p);

/* Providers. settings_json may be NULL (fully offline) or an object with
 * "embedder" (offline|external), "reasoner" (offline|external), "mapper"
 * (rules|external), "*_endpoint", "*_model", "key_env", "timeout_ms",
 * "max_in_flight" and "max_retries". */
SG_API sg_status sg_providers_create(const char* settings_json, sg_providers** out);
SG_API void sg_providers_free(sg_providers* p);

/* Knowledge base */
SG_API sg_status sg_kb_build(const sg_patterns* p, const sg_corpus* c, const sg_providers* prov,
                             size_t k, sg_kb** out);
SG_API sg_status sg_kb_save(const sg_kb* kb, const char* dir, int force);
SG_API sg_status sg_kb_load(const sg_taxonomy* t, const char* dir, sg_kb** out);
SG_API size_t sg_kb_entry_count(const sg_kb* kb);
SG_API void sg_kb_free(sg_kb* kb);

/* Detection. `malicious` receives 1 for a malicious verdict, else 0.
 * Timings are omitted from JSON output unless include_timings is set. */
SG_API sg_status sg_classify_json(const sg_kb* kb, const sg_providers* prov,
                                  const char* sequence_json, char** verdict_json);
SG_API sg_status sg_scan_package(const sg_kb* kb, const sg_providers* prov, const char* root,
                                 size_t jobs, sg_format format, int include_timings,
                                 char** report, int* malicious);

/* Source extraction: {"sites": [...], "slices": [...], "sequence": ...}. */
SG_API sg_status sg_extract_source(const sg_taxonomy* t, const sg_providers* prov,
                                   const char* file_name, const char* source, char** out);

/* Evaluation over a JSONL manifest; policy is "benign" or "malicious". */
SG_API sg_status sg_evaluate(const sg_kb* kb, const sg_providers* prov, const char* manifest,
                             const char* unscannable_policy, size_t jobs, char** metrics_json);

#ifdef __cplusplus
}
#endif

#endif /* SEQGUARD_SEQGUARD_H */
