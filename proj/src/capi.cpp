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
#include "mmcca/mmcca.h"

#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "mmcca/config.hpp"
#include "mmcca/error.hpp"
#include "mmcca/eval.hpp"
#include "mmcca/experiment.hpp"
#include "mmcca/io.hpp"
#include "mmcca/pipeline.hpp"

struct mmcca_config {
  mmcca::KeyValueConfig kv;
};

struct mmcca_view {
  mmcca::ViewMatrix X;
};

struct mmcca_fit {
  mmcca::FitResult result;
  mmcca::FitConfig config;
  std::string diagnostics;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_code;

mmcca_status fail(mmcca_status status, const std::string& code, const std::string& message) {
  last_code = code;
  last_error = message;
  return status;
}

template <typename F>
mmcca_status guarded(F&& body) {
  last_error.clear();
  last_code.clear();
  try {
    body();
    return MMCCA_OK;
  } catch (const mmcca::Error& e) {
    const mmcca_status s = e.code() == mmcca::Errc::io ? MMCCA_ERR_IO
                           : mmcca::is_numerical(e.code()) ? MMCCA_ERR_NUMERICAL
                                                           : MMCCA_ERR_VALIDATION;
    return fail(s, mmcca::errc_name(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MMCCA_ERR_NUMERICAL, "out_of_memory", "out of memory");
  } catch (const std::exception& e) {
    return fail(MMCCA_ERR_VALIDATION, "internal", e.what());
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw mmcca::Error(mmcca::Errc::invalid_argument, what);
}

}  // namespace

extern "C" {

const char* mmcca_version(void) { return "0.1.0"; }
const char* mmcca_last_error(void) { return last_error.c_str(); }
const char* mmcca_last_error_code(void) { return last_code.c_str(); }

mmcca_status mmcca_config_create(mmcca_config** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    *out = new mmcca_config();
  });
}

mmcca_status mmcca_config_set(mmcca_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null argument");
    require(*key != '\0', "empty key");
    cfg->kv.set(key, value);
  });
}

mmcca_status mmcca_config_load(mmcca_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg && path, "null argument");
    const mmcca::KeyValueConfig file = mmcca::KeyValueConfig::load(path);
    for (const auto& [k, v] : file.values()) cfg->kv.set(k, v);
  });
}

void mmcca_config_free(mmcca_config* cfg) { delete cfg; }

mmcca_status mmcca_view_from_dense(const double* values, int64_t M, int64_t N, mmcca_view** out) {
  return guarded([&] {
    require(values && out, "null argument");
    require(M > 0 && N > 0, "dimensions must be positive");
    *out = new mmcca_view{mmcca::ViewMatrix::dense(Eigen::Map<const mmcca::Matrix>(values, M, N))};
  });
}

mmcca_status mmcca_view_from_triplets(int64_t M, int64_t N, size_t nnz, const int64_t* variables,
                                      const int64_t* samples, const double* counts, mmcca_view** out) {
  return guarded([&] {
    require(out != nullptr, "null output handle");
    require(nnz == 0 || (variables && samples && counts), "null triplet arrays");
    require(M > 0 && N > 0, "dimensions must be positive");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(nnz);
    for (size_t i = 0; i < nnz; ++i) triplets.emplace_back(variables[i], samples[i], counts[i]);
    *out = new mmcca_view{mmcca::ViewMatrix::from_triplets(M, N, triplets)};
  });
}

mmcca_status mmcca_view_read(const char* path, const char* format, mmcca_view** out) {
  return guarded([&] {
    require(path && out, "null argument");
    const mmcca::DataFormat f = format ? mmcca::parse_format(format) : mmcca::detect_format(path);
    *out = new mmcca_view{mmcca::read_view(path, f)};
  });
}

mmcca_status mmcca_view_write(const mmcca_view* view, const char* path) {
  return guarded([&] {
    require(view && path, "null argument");
    if (mmcca::detect_format(path) == mmcca::DataFormat::docword) {
      mmcca::write_docword(path, view->X);
    } else {
      mmcca::write_dense_csv(path, view->X.to_dense());
    }
  });
}

mmcca_status mmcca_view_dims(const mmcca_view* view, int64_t* M, int64_t* N, int64_t* nnz, int* is_sparse) {
  return guarded([&] {
    require(view != nullptr, "null view");
    if (M) *M = view->X.variables();
    if (N) *N = view->X.samples();
    if (nnz) {
      *nnz = view->X.is_sparse() ? view->X.sparse_values().nonZeros()
                                 : (view->X.dense_values().array() != 0.0).count();
    }
    if (is_sparse) *is_sparse = view->X.is_sparse() ? 1 : 0;
  });
}

void mmcca_view_free(mmcca_view* view) { delete view; }

mmcca_status mmcca_fit_run(const mmcca_view* X1, const mmcca_view* X2, const mmcca_config* cfg, mmcca_fit** out) {
  return guarded([&] {
    require(X1 && X2 && cfg && out, "null argument");
    auto fit = std::make_unique<mmcca_fit>();
    fit->config = mmcca::fit_config_from(cfg->kv);
    fit->result = mmcca::fit(X1->X, X2->X, fit->config);
    fit->diagnostics = mmcca::diagnostics_json(fit->result.diagnostics, fit->config);
    *out = fit.release();
  });
}

mmcca_status mmcca_fit_dims(const mmcca_fit* fit, int64_t* M1, int64_t* M2, int64_t* K) {
  return guarded([&] {
    require(fit != nullptr, "null fit");
    if (M1) *M1 = fit->result.loadings.D1.rows();
    if (M2) *M2 = fit->result.loadings.D2.rows();
    if (K) *K = fit->result.loadings.D1.cols();
  });
}

mmcca_status mmcca_fit_loadings(const mmcca_fit* fit, int view, double* out, size_t len) {
  return guarded([&] {
    require(fit && out, "null argument");
    require(view == 1 || view == 2, "view must be 1 or 2");
    const mmcca::Matrix& D = view == 1 ? fit->result.loadings.D1 : fit->result.loadings.D2;
    require(len >= static_cast<size_t>(D.size()), "output buffer too small");
    Eigen::Map<mmcca::Matrix>(out, D.rows(), D.cols()) = D;
  });
}

mmcca_status mmcca_fit_write(const mmcca_fit* fit, const char* dir) {
  return guarded([&] {
    require(fit && dir, "null argument");
    mmcca::write_fit(dir, fit->result, fit->config);
  });
}

const char* mmcca_fit_diagnostics_json(const mmcca_fit* fit) { return fit ? fit->diagnostics.c_str() : ""; }

void mmcca_fit_free(mmcca_fit* fit) { delete fit; }

mmcca_status mmcca_l1_error(const double* D_hat, const double* D_true, int64_t M, int64_t K, int allow_sign,
                            double* error, int64_t* permutation) {
  return guarded([&] {
    require(D_hat && D_true && error, "null argument");
    require(M > 0 && K > 0, "dimensions must be positive");
    const mmcca::MatchResult r = mmcca::l1_error(Eigen::Map<const mmcca::Matrix>(D_hat, M, K),
                                                 Eigen::Map<const mmcca::Matrix>(D_true, M, K), allow_sign != 0);
    *error = r.error;
    if (permutation) {
      for (int64_t k = 0; k < K; ++k) permutation[k] = r.permutation[static_cast<size_t>(k)];
    }
  });
}

mmcca_status mmcca_eval_dirs(const char* fit_dir, const char* truth_dir, int allow_sign, double* err1,
                             double* err1_view2) {
  return guarded([&] {
    require(fit_dir && truth_dir, "null argument");
    const mmcca::Loadings fit = mmcca::read_loadings(fit_dir);
    const mmcca::Loadings truth = mmcca::read_instance_loadings(truth_dir);
    if (err1) *err1 = mmcca::l1_error(fit.D1, truth.D1, allow_sign != 0).error;
    if (err1_view2) *err1_view2 = mmcca::l1_error(fit.D2, truth.D2, allow_sign != 0).error;
  });
}

mmcca_status mmcca_synth(const mmcca_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg && out_dir, "null argument");
    mmcca::synthesize(mmcca::experiment_config_from(cfg->kv), out_dir);
  });
}

mmcca_status mmcca_experiment(const mmcca_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg && out_dir, "null argument");
    const mmcca::ExperimentResult result = mmcca::run_experiment(mmcca::experiment_config_from(cfg->kv));
    mmcca::write_experiment(out_dir, result);
  });
}

}  // extern "C"
