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

#include "mmcca/linalg.hpp"
#include "mmcca/moments.hpp"
#include "mmcca/nojd.hpp"
#include "mmcca/synthetic.hpp"
#include "mmcca/whitening.hpp"

namespace mmcca {

enum class Method { cumulant, gencov, spectral };

struct FitConfig {
  ModelKind model = ModelKind::dcca;
  Index K = 1;
  Method method = Method::gencov;
  /// Base processing-point scale; the per-view scale divides it by the mean
  /// absolute entry of the view.
  double delta = 0.1;
  /// Number of gencov targets including t = 0; 0 means 2K + 1.
  Index num_points = 0;
  int max_sweeps = 100;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  WhiteningMethod whitening = WhiteningMethod::exact;
  Index oversample = 10;
  /// Appended after the canonical points (gencov only).
  std::vector<ProcessingPoint> extra_points;
};

/// Throws invalid_argument for K < 1, delta <= 0 and other bad settings.
void validate(const FitConfig& config);

struct Loadings {
  Matrix D1;
  Matrix D2;
};

struct DroppedPoint {
  Index index = 0;
  std::string reason;
};

struct FitDiagnostics {
  std::vector<SweepRecord> trace;
  int sweeps = 0;
  double final_off = 0.0;
  bool converged = false;
  bool off_increased = false;
  double diagonalizer_condition = 1.0;
  double whitening_residual = 0.0;
  /// sigma_1 / sigma_K of the whitened cross-covariance.
  double whitening_condition = 1.0;
  double imaginary_ratio = 0.0;
  Index num_targets = 0;
  std::vector<DroppedPoint> dropped;
  /// Smallest relative distance between the eigenvalue profiles of two
  /// columns across all targets; near zero means the columns are not
  /// separated by the targets and the recovery is not identifiable.
  double identifiability_gap = 0.0;
  /// Set when the answer should not be trusted: unidentifiable columns or a
  /// diagonalization that stalled or increased Off.
  bool flagged = false;
  std::vector<std::string> warnings;
  double runtime_seconds = 0.0;
};

struct FitResult {
  Loadings loadings;
  WhiteningPair whitening;
  Matrix Q;
  FitDiagnostics diagnostics;
};

/// delta * N * M / sum |X|; throws scale for an all-zero view.
double processing_scale(const ViewMatrix& X, double delta);

/// {0} then delta1 W1^T e_p on view 1 then delta2 W2^T e_p on view 2.
std::vector<ProcessingPoint> build_processing_points(const WhiteningPair& W, double delta1, double delta2);
std::vector<ProcessingPoint> build_processing_points(const WhiteningPair& W, const ViewMatrix& X1,
                                                     const ViewMatrix& X2, double delta);

/// Whitened, deflated generalized cross-covariances, one per surviving point.
/// A point with all-zero t uses the unbiased sample cross-covariance. Points
/// with degenerate weights are skipped and reported through `dropped`.
TargetSet build_targets_gencov(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W,
                               const std::vector<ProcessingPoint>& points, ModelKind model,
                               std::vector<DroppedPoint>* dropped = nullptr);

/// W1 S12 W2^T and the whitened T-cumulant projections for u = e_p on both
/// views: 2K + 1 targets.
TargetSet build_targets_cumulant(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W);

/// D1 = W1^+ Q, D2 = W2^+ Q^{-T}, then the per-view sign/truncation rule for
/// count views and l1 column normalization.
Loadings recover_loadings(const WhiteningPair& W, const Matrix& Q, ModelKind model);

/// Diagonalize prepared targets and recover loadings. For the spectral method
/// exactly one target must be supplied.
FitResult fit_targets(const WhiteningPair& W, const TargetSet& targets, const FitConfig& config);

FitResult fit(const ViewMatrix& X1, const ViewMatrix& X2, const FitConfig& config);

/// The same pipeline on exact population moments of a noiseless model, with
/// explicit per-view processing scales.
FitResult fit_population(const Matrix& D1, const Matrix& D2, const SourceModel& sources, const FitConfig& config,
                         double delta1, double delta2);

/// Population analogues of the two target builders.
TargetSet population_targets_gencov(const Matrix& D1, const Matrix& D2, const SourceModel& sources,
                                    const WhiteningPair& W, const std::vector<ProcessingPoint>& points,
                                    ModelKind model);
TargetSet population_targets_cumulant(const Matrix& D1, const Matrix& D2, const SourceModel& sources,
                                      const WhiteningPair& W);

const char* method_name(Method m) noexcept;
const char* model_name(ModelKind m) noexcept;
Method parse_method(const std::string& s);
ModelKind parse_model(const std::string& s);

}  // namespace mmcca
