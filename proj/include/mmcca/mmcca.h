// Copyright 2026 The mmcca Authors
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
/* C interface to the mmcca library. All objects are opaque handles created
 * and released by the library. Functions return an mmcca_status; on failure
 * mmcca_last_error() describes the problem for the calling thread. */
#ifndef MMCCA_H
#define MMCCA_H

#include <stddef.h>
#include <stdint.h>

#if defined(MMCCA_BUILDING_LIBRARY)
#define MMCCA_API __attribute__((visibility("default")))
#else
#define MMCCA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mmcca_status {
  MMCCA_OK = 0,
  MMCCA_ERR_VALIDATION = 1,
  MMCCA_ERR_NUMERICAL = 2,
  MMCCA_ERR_IO = 3
} mmcca_status;

typedef struct mmcca_config mmcca_config;
typedef struct mmcca_view mmcca_view;
typedef struct mmcca_fit mmcca_fit;

MMCCA_API const char* mmcca_version(void);
/* Message of the last failure on this thread ("" if none). */
MMCCA_API const char* mmcca_last_error(void);
/* Category name of the last failure, e.g. "rank_deficient". */
MMCCA_API const char* mmcca_last_error_code(void);

/* Flat key/value settings shared by fit, synth and experiment. */
MMCCA_API mmcca_status mmcca_config_create(mmcca_config** out);
MMCCA_API mmcca_status mmcca_config_set(mmcca_config* cfg, const char* key, const char* value);
/* Merges a "key = value" file into cfg. */
MMCCA_API mmcca_status mmcca_config_load(mmcca_config* cfg, const char* path);
MMCCA_API void mmcca_config_free(mmcca_config* cfg);

/* values: M x N, column-major (one column per sample). */
MMCCA_API mmcca_status mmcca_view_from_dense(const double* values, int64_t M, int64_t N, mmcca_view** out);
/* 0-based (variable, sample, count) triplets; duplicates are summed. */
MMCCA_API mmcca_status mmcca_view_from_triplets(int64_t M, int64_t N, size_t nnz, const int64_t* variables,
                                                const int64_t* samples, const double* counts, mmcca_view** out);
/* format: "dense-csv", "docword-triplets", or NULL to pick by extension. */
MMCCA_API mmcca_status mmcca_view_read(const char* path, const char* format, mmcca_view** out);
MMCCA_API mmcca_status mmcca_view_write(const mmcca_view* view, const char* path);
MMCCA_API mmcca_status mmcca_view_dims(const mmcca_view* view, int64_t* M, int64_t* N, int64_t* nnz, int* is_sparse);
MMCCA_API void mmcca_view_free(mmcca_view* view);

MMCCA_API mmcca_status mmcca_fit_run(const mmcca_view* X1, const mmcca_view* X2, const mmcca_config* cfg,
                                     mmcca_fit** out);
MMCCA_API mmcca_status mmcca_fit_dims(const mmcca_fit* fit, int64_t* M1, int64_t* M2, int64_t* K);
/* Copies D1 (view 1) or D2 (view 2), column-major, into out[len]. */
MMCCA_API mmcca_status mmcca_fit_loadings(const mmcca_fit* fit, int view, double* out, size_t len);
/* Writes D1.csv, D2.csv and diagnostics.json into dir. */
MMCCA_API mmcca_status mmcca_fit_write(const mmcca_fit* fit, const char* dir);
/* Valid until the fit is freed. */
MMCCA_API const char* mmcca_fit_diagnostics_json(const mmcca_fit* fit);
MMCCA_API void mmcca_fit_free(mmcca_fit* fit);

/* err1 of D_hat against D_true, both M x K column-major. permutation may be
 * NULL; otherwise receives K entries (recovered column per true column). */
MMCCA_API mmcca_status mmcca_l1_error(const double* D_hat, const double* D_true, int64_t M, int64_t K,
                                      int allow_sign, double* error, int64_t* permutation);
/* err1 of D1.csv / D2.csv in fit_dir against those in truth_dir. */
MMCCA_API mmcca_status mmcca_eval_dirs(const char* fit_dir, const char* truth_dir, int allow_sign, double* err1,
                                       double* err1_view2);

/* Generator instance and panels for every (N, trial) cell of cfg. */
MMCCA_API mmcca_status mmcca_synth(const mmcca_config* cfg, const char* out_dir);
/* Runs the sweep in cfg, writing results.csv and summary.csv to out_dir. */
MMCCA_API mmcca_status mmcca_experiment(const mmcca_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
