/*
 * Copyright 2026 The CIKP Authors
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

/*
 * C interface to libcikp: knowledge propagation over conditional
 * independence graphs.
 *
 * Conventions:
 *   - Every function returns a cikp_status; CIKP_OK is 0.
 *   - On failure, cikp_last_error() returns a message for the calling thread,
 *     valid until the next call into the library from that thread.
 *   - Objects are opaque handles created by *_load / *_create style calls and
 *     released with the matching *_free. Free functions accept NULL.
 *   - Strings returned through char** are heap-allocated by the library and
 *     must be released with cikp_string_free.
 *   - Options are passed as JSON objects (NULL or "" means defaults); see
 *     docs/c_api.md for the accepted keys.
 */

#ifndef CIKP_CIKP_H_
#define CIKP_CIKP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CIKP_BUILDING_LIBRARY)
#    define CIKP_API __declspec(dllexport)
#  else
#    define CIKP_API __declspec(dllimport)
#  endif
#else
#  define CIKP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum cikp_status {
  CIKP_OK = 0,
  CIKP_ERROR_USAGE = 1,     /* invalid argument or option */
  CIKP_ERROR_DATA = 2,      /* unreadable or malformed input */
  CIKP_ERROR_NUMERICAL = 3, /* factorization/solve failure */
  CIKP_ERROR_INTERNAL = 4
} cikp_status;

typedef struct cikp_dataset cikp_dataset;
typedef struct cikp_matrix cikp_matrix;

CIKP_API const char* cikp_version(void);
CIKP_API const char* cikp_last_error(void);
CIKP_API void cikp_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* format: "cora", "pubmed" or "json". */
CIKP_API cikp_status cikp_dataset_load(const char* path, const char* format,
                                       cikp_dataset** out);
/* options: see SyntheticSpec keys (nodes, categories, words, signal, noise,
 * seed). */
CIKP_API cikp_status cikp_dataset_synthetic(const char* options_json,
                                            cikp_dataset** out);
CIKP_API void cikp_dataset_free(cikp_dataset* ds);
CIKP_API cikp_status cikp_dataset_shape(const cikp_dataset* ds, size_t* nodes,
                                        size_t* samples, size_t* categories);
CIKP_API cikp_status cikp_dataset_subsample(const cikp_dataset* ds, size_t size,
                                            uint64_t seed, int stratified,
                                            cikp_dataset** out);
/* method: "none", "minmax" or "mean". */
CIKP_API cikp_status cikp_dataset_normalize(const cikp_dataset* ds,
                                            const char* method,
                                            cikp_dataset** out);
CIKP_API cikp_status cikp_dataset_save(const cikp_dataset* ds, const char* path);
/* Label index (into the category list) of every node, `nodes` entries. */
CIKP_API cikp_status cikp_dataset_labels(const cikp_dataset* ds, int* labels,
                                         size_t nodes);

/* ---- matrices ---------------------------------------------------------- */

/* kind: "partial-correlation", "exp", "pos", "neg", "maxnorm", "embedding",
 * "generic". data is row-major rows*cols. */
CIKP_API cikp_status cikp_matrix_create(size_t rows, size_t cols,
                                        const double* data, const char* kind,
                                        cikp_matrix** out);
CIKP_API cikp_status cikp_matrix_load(const char* path, cikp_matrix** out);
/* encoding: "json", "bin" or "csv". */
CIKP_API cikp_status cikp_matrix_save(const cikp_matrix* m, const char* path,
                                      const char* encoding);
CIKP_API void cikp_matrix_free(cikp_matrix* m);
CIKP_API cikp_status cikp_matrix_shape(const cikp_matrix* m, size_t* rows,
                                       size_t* cols);
/* Copies rows*cols values, row-major, into `out`. */
CIKP_API cikp_status cikp_matrix_copy(const cikp_matrix* m, double* out,
                                      size_t capacity);
/* Writes a NUL-terminated kind name into `out`. */
CIKP_API cikp_status cikp_matrix_kind(const cikp_matrix* m, char* out,
                                      size_t capacity);

/* Partial-correlation matrix of a dataset. options: correlation
 * ("pearson"|"spearman"), lambda, tau. */
CIKP_API cikp_status cikp_recover(const cikp_dataset* ds, const char* options_json,
                                  cikp_matrix** out);

/* Transition matrix from a partial-correlation matrix.
 * kind: "exp", "pos", "neg" or "maxnorm"; alpha ignored for pos/neg. */
CIKP_API cikp_status cikp_transition(const cikp_matrix* p, const char* kind,
                                     double alpha, cikp_matrix** out);

/* ---- propagation ------------------------------------------------------- */

/* p: partial-correlation matrix (or an "exp" transition matrix for the
 * exponential methods). problem_json: see docs/formats.md. options: method,
 * alpha, epsilon, max_iters, regularizer, selection, threshold. */
CIKP_API cikp_status cikp_propagate(const cikp_matrix* p, const char* problem_json,
                                    const char* options_json, char** result_json);

/* Embedding baseline. options: alpha, dim, walk_length, walks_per_node, p, q,
 * window, negative_samples, epochs, learning_rate, classifier, seed. */
CIKP_API cikp_status cikp_embed(const cikp_matrix* p, const char* problem_json,
                                const char* options_json, char** result_json,
                                cikp_matrix** embeddings);

/* ---- experiments ------------------------------------------------------- */

/* options: seed, threads, omit_timing, omit_predictions (override the spec). */
CIKP_API cikp_status cikp_experiment(const char* spec_json, const char* options_json,
                                     char** report_json, char** report_csv);

/* options: method, counts (array), seed, threads. */
CIKP_API cikp_status cikp_sweep_mask(const char* spec_json, const char* options_json,
                                     char** result_json, char** result_csv);

/* options: method, thresholds (array), relative (bool), level, seed, threads. */
CIKP_API cikp_status cikp_sweep_threshold(const char* spec_json,
                                          const char* options_json,
                                          char** result_json, char** result_csv);

#ifdef __cplusplus
}
#endif

#endif /* CIKP_CIKP_H_ */
