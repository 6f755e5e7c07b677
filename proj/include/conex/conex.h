// Copyright 2026 The Conex Authors.
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

/* C interface to the concept-extraction toolkit.
 *
 * Every function returns a conex_status; on failure conex_last_error()
 * describes the error for the calling thread. Strings returned through
 * `char **` parameters are owned by the caller and released with
 * conex_string_free(). `config_json` arguments take the JSON produced by
 * conex_config_resolve(); NULL means all defaults. */

#ifndef CONEX_CONEX_H_
#define CONEX_CONEX_H_

#include <stddef.h>

#if defined(_WIN32)
#define CONEX_API __declspec(dllexport)
#else
#define CONEX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  CONEX_OK = 0,
  CONEX_E_IO = 1,
  CONEX_E_PARSE = 2,
  CONEX_E_VALIDATION = 3,
  CONEX_E_CONFIG = 4,
  CONEX_E_NUMERIC = 5,
  CONEX_E_UNAVAILABLE = 6, /* n-gram missing from the frequency table */
  CONEX_E_INTERNAL = 7
} conex_status;

typedef struct conex_freq_table conex_freq_table;
typedef struct conex_model conex_model;

CONEX_API const char *conex_version(void);
CONEX_API const char *conex_last_error(void);
CONEX_API const char *conex_status_name(conex_status status);
CONEX_API void conex_string_free(char *s);

/* Defaults, then the key=value file at `config_path` (may be NULL), then the
 * `overrides_json` object (may be NULL). */
CONEX_API conex_status conex_config_resolve(const char *config_path,
                                            const char *overrides_json, char **out_json);

CONEX_API conex_status conex_freq_table_load(const char *path, conex_freq_table **out);
CONEX_API void conex_freq_table_free(conex_freq_table *table);
CONEX_API size_t conex_freq_table_size(const conex_freq_table *table);

/* Both neighbor curves of a space-separated n-gram key with their angles. */
CONEX_API conex_status conex_angles_json(const conex_freq_table *table, const char *ngram,
                                         int grid_h, char **out_json);

/* Documents (JSONL, or CoNLL for .conll/.tsv inputs) -> dense weak JSONL.
 * `out_stats_json` may be NULL. */
CONEX_API conex_status conex_annotate_file(const conex_freq_table *table,
                                           const char *config_json, const char *input_path,
                                           const char *output_path, char **out_stats_json);

/* Trains on dense weak JSONL. Writes step-<n>.ckpt per checkpoint,
 * best.ckpt, last.ckpt, loss.csv, checkpoints.csv and run.json into
 * `output_dir`. `validation_path` and `init_path` may be NULL. */
CONEX_API conex_status conex_train(const char *config_json, const char *input_path,
                                   const char *validation_path, const char *init_path,
                                   const char *output_dir, char **out_summary_json);

CONEX_API conex_status conex_model_load(const char *path, conex_model **out);
CONEX_API void conex_model_free(conex_model *model);
CONEX_API conex_status conex_model_config_json(const conex_model *model, char **out_json);

/* Extracts with each model and ensembles the results when more than one. */
CONEX_API conex_status conex_extract_file(const conex_model *const *models, size_t num_models,
                                          const char *config_json, const char *input_path,
                                          const char *output_path, char **out_stats_json);

CONEX_API conex_status conex_ensemble_files(const char *const *input_paths, size_t num_inputs,
                                            const char *output_path);

/* ScoreReport JSON; `out_table` (may be NULL) receives the aligned table. */
CONEX_API conex_status conex_evaluate_files(const char *predicted_path, const char *gold_path,
                                            char **out_json, char **out_table);

#ifdef __cplusplus
}
#endif

#endif /* CONEX_CONEX_H_ */
