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
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmcca/config.hpp"
#include "mmcca/pipeline.hpp"
#include "mmcca/synthetic.hpp"

namespace mmcca {

enum class Generator { discrete, continuous };

struct ExperimentConfig {
  Generator generator = Generator::discrete;
  DiscreteParams discrete;
  ContinuousParams continuous;
  std::vector<Index> n_grid{500, 1000, 2000, 5000, 10000};
  int trials = 5;
  /// Method names: cumulant, gencov, spectral, or random (Dirichlet /
  /// uniform loadings drawn without looking at the data).
  std::vector<std::string> methods{"cumulant", "gencov"};
  std::vector<double> deltas{0.1};
  std::uint64_t seed = 0;
  /// 0 uses the hardware concurrency.
  int threads = 0;
  /// Model, whitening and NOJD controls; K and delta are overwritten.
  FitConfig fit;
  /// Sign-aware matching; defaults to on for the continuous generator.
  bool allow_sign = false;
};

void validate(const ExperimentConfig& config);

/// Reads keys such as model, methods, K, delta(s), N_grid, trials, seed,
/// whitening, max_sweeps, tol, generator, mode, M, M1, M2, K1, K2, c, c1, c2,
/// Ls, Ln, L, threads, allow_sign. Unknown keys are rejected.
ExperimentConfig experiment_config_from(const KeyValueConfig& kv);
/// The fit-related subset of the same keys.
FitConfig fit_config_from(const KeyValueConfig& kv);

struct ResultRecord {
  std::string method;
  Index N = 0;
  int trial = 0;
  double delta = 0.0;
  /// err1 of D1 and of D2; NaN when the fit failed.
  double err1 = 0.0;
  double err1_view2 = 0.0;
  double runtime_seconds = 0.0;
  int sweeps = 0;
  double final_off = 0.0;
  Index dropped_points = 0;
  bool flagged = false;
  /// "ok" or the error category of a failed fit.
  std::string status = "ok";
  std::string message;
};

struct SummaryRow {
  std::string method;
  double delta = 0.0;
  Index N = 0;
  double median_err1 = 0.0;
  double median_err1_view2 = 0.0;
  int ok = 0;
  int failed = 0;
};

struct ExperimentResult {
  /// Sorted by (method, N, trial, delta).
  std::vector<ResultRecord> records;
  /// Sorted by (method, delta, N).
  std::vector<SummaryRow> summary;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

std::string records_csv(const ExperimentResult& result);
std::string summary_csv(const ExperimentResult& result);
/// results.csv and summary.csv in dir.
void write_experiment(const std::string& dir, const ExperimentResult& result);

/// Writes the ground truth to dir/instance and one panel pair per grid cell
/// to dir/N<N>_trial<t>/X1, X2 (.txt triplets for counts, .csv otherwise),
/// using the same seeds as run_experiment. Returns the panel directories.
std::vector<std::string> synthesize(const ExperimentConfig& config, const std::string& dir);

/// Median of the finite values; NaN when there are none.
double median(std::vector<double> values);

}  // namespace mmcca
