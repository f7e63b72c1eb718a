/* Copyright 2026 The citeweave Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to libciteweave.
 *
 * Conventions:
 *  - Every fallible function returns a cw_status. On failure the message is
 *    available from cw_last_error() until the next call on the same thread.
 *  - Handles are opaque; each *_create / *_load has a matching *_destroy,
 *    which accepts NULL.
 *  - Strings returned through char** are heap-allocated and must be released
 *    with cw_string_free(). Input strings are NUL-terminated UTF-8.
 *  - Handles are not synchronized: share one across threads only for
 *    read-only calls.
 */

#ifndef CITEWEAVE_H_
#define CITEWEAVE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(CW_BUILDING_LIBRARY)
#define CW_API __attribute__((visibility("default")))
#else
#define CW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match the CLI exit codes. */
typedef enum cw_status {
  CW_OK = 0,
  CW_ERR_DATA = 1,     /* malformed input or invariant violation */
  CW_ERR_USAGE = 2,    /* bad argument or configuration */
  CW_ERR_PROVIDER = 3, /* provider or transport failure */
  CW_ERR_INTERNAL = 4
} cw_status;

typedef enum cw_mask_kind { CW_MASK_MODULATED = 0, CW_MASK_CAUSAL = 1 } cw_mask_kind;
typedef enum cw_mask_format { CW_FORMAT_JSON = 0, CW_FORMAT_PBM = 1 } cw_mask_format;

CW_API const char* cw_version(void);
CW_API const char* cw_last_error(void);
CW_API void cw_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

typedef struct cw_config cw_config;

CW_API cw_status cw_config_create(cw_config** out);
CW_API void cw_config_destroy(cw_config* cfg);
/* Applies a key = value file with [role] sections. */
CW_API cw_status cw_config_load_file(cw_config* cfg, const char* path);
/* Applies CITEWEAVE_* environment variables. */
CW_API cw_status cw_config_apply_env(cw_config* cfg);
CW_API cw_status cw_config_set(cw_config* cfg, const char* key, const char* value);
CW_API cw_status cw_config_get(const cw_config* cfg, const char* key, char** value);
/* Checks cross-field invariants (tau range, endpoints in http mode). */
CW_API cw_status cw_config_validate(const cw_config* cfg);

/* ---- data ----------------------------------------------------------------- */

typedef struct cw_dialogues cw_dialogues;

CW_API cw_status cw_dialogues_load(const char* path, cw_dialogues** out);
CW_API void cw_dialogues_destroy(cw_dialogues* d);
CW_API size_t cw_dialogues_count(const cw_dialogues* d);
/* Canonical single-line JSON of dialogue i. */
CW_API cw_status cw_dialogues_get_json(const cw_dialogues* d, size_t i, char** json);

typedef struct cw_embeddings cw_embeddings;

CW_API cw_status cw_embeddings_load(const char* path, cw_embeddings** out);
CW_API void cw_embeddings_destroy(cw_embeddings* e);
CW_API size_t cw_embeddings_count(const cw_embeddings* e);
CW_API size_t cw_embeddings_dim(const cw_embeddings* e);
/* Copies the vector for `id` into out[0..capacity); fails unless
 * capacity >= dim. */
CW_API cw_status cw_embeddings_get(const cw_embeddings* e, const char* id, float* out,
                                   size_t capacity);
/* JSONL <-> FVEC by output extension; *count receives the vector count. */
CW_API cw_status cw_convert_embeddings(const char* in_path, const char* out_path,
                                       size_t* count);

/* ---- primitives ------------------------------------------------------- */

CW_API cw_status cw_cosine_similarity(const float* a, const float* b, size_t dim,
                                      double* out);
/* rows is n x dim row-major; ids receives n cluster ids. */
CW_API cw_status cw_cluster_features(const float* rows, size_t n, size_t dim, double tau,
                                     uint32_t* ids);
CW_API cw_status cw_encode_augmented(const char* base, size_t span_start, size_t span_end,
                                     uint32_t citation, char** out);
CW_API cw_status cw_decode_augmented(const char* augmented, char** base, size_t* span_start,
                                     size_t* span_end, uint32_t* citation);
/* layout like "T:3,D:4,T:2"; the output ends with a newline. */
CW_API cw_status cw_mask_render(const char* layout, cw_mask_kind kind, cw_mask_format format,
                                char** out);

/* ---- commands ------------------------------------------------------------- */

/* Cites the configured dialogues and writes citation JSONL to out_path. */
CW_API cw_status cw_cite(const cw_config* cfg, const char* out_path, size_t* dialogues);
/* Runs the configured dialogues through the providers and writes the
 * transcript JSONL to out_path. */
CW_API cw_status cw_run(const cw_config* cfg, const char* out_path, size_t* turns);
/* kind: pair-f1 | cite-acc | consistency | text | intent. metric and field
 * only apply to text (metric bleu1|bleu2|rouge1|rougeL, field
 * text|description) and may be NULL otherwise. The report JSON goes to
 * report_path when non-NULL; *summary (optional) receives one line. */
CW_API cw_status cw_eval(const cw_config* cfg, const char* kind, const char* gold_path,
                         const char* pred_path, const char* metric, const char* field,
                         const char* report_path, char** summary);
/* Writes data to path through a temporary sibling file and rename. */
CW_API cw_status cw_write_file(const char* path, const char* data, size_t size);
/* Writes the synthetic dataset (dialogues, embeddings, labels, script). */
CW_API cw_status cw_synth(const char* out_dir, uint64_t seed, size_t count);

#ifdef __cplusplus
}
#endif

#endif /* CITEWEAVE_H_ */
