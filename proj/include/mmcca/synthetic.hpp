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

#include "mmcca/linalg.hpp"
#include "mmcca/moments.hpp"

namespace mmcca {

enum class LoadingMode { dirichlet, fixed2d };

struct DiscreteParams {
  Index M1 = 20, M2 = 20, K = 10, K1 = 20, K2 = 20;
  double c = 0.3, c1 = 0.1, c2 = 0.1;
  /// Expected sample length due to the sources and to the noise.
  double Ls = 1000.0, Ln = 1000.0;
  LoadingMode mode = LoadingMode::dirichlet;
};

/// Ground truth for x_j ~ Poisson(D_j alpha + F_j beta_j) with gamma sources.
struct DiscreteInstance {
  DiscreteParams params;
  Matrix D1, D2, F1, F2;
  /// Gamma rates b = K c / Ls and b_j = K_j c_j / Ln.
  double b = 0.0, b1 = 0.0, b2 = 0.0;
};

struct ContinuousParams {
  Index M1 = 20, M2 = 20, K = 10, K1 = 10, K2 = 10;
  double c = 0.1, c1 = 0.1, c2 = 0.1;
  double Ls = 1000.0, Ln = 1000.0;
};

/// Ground truth for x_j = D_j alpha + F_j beta_j with sign-symmetrized gamma
/// sources; loadings uniform on [-1, 1] with unit l1 columns.
struct ContinuousInstance {
  ContinuousParams params;
  Matrix D1, D2, F1, F2;
  double b = 0.0, b1 = 0.0, b2 = 0.0;
};

/// Observations with the latent draws that produced them (columns = samples).
struct Sample {
  ViewMatrix X1;
  ViewMatrix X2;
  Matrix alpha;
  Matrix beta1;
  Matrix beta2;
};

DiscreteInstance gen_discrete_instance(const DiscreteParams& params, std::uint64_t seed);
/// Counts are returned as sparse views.
Sample sample_discrete(const DiscreteInstance& inst, Index N, std::uint64_t seed);

ContinuousInstance gen_continuous_instance(const ContinuousParams& params, std::uint64_t seed);
Sample sample_continuous(const ContinuousInstance& inst, Index N, std::uint64_t seed);

Matrix normalize_columns_l1(const Matrix& D);

// ---------------------------------------------------------------------------
// Population moments of independent sources, for noiseless oracles.

enum class SourceLaw { gamma, symmetric_gamma, gaussian };

/// K independent sources of one law. For gamma laws `shape` and `rate` are
/// the gamma parameters; for gaussian `rate` is ignored and `shape` holds the
/// variances.
struct SourceModel {
  SourceLaw law = SourceLaw::gamma;
  Vector shape;
  Vector rate;

  Index k() const { return shape.size(); }
  Vector variance() const;
  /// Diagonal of the generalized covariance (CGF Hessian) at h.
  Vector generalized_variance(const Vector& h) const;
  /// Third cumulants (zero for the symmetric laws).
  Vector third_cumulant() const;
};

/// D1 diag(var alpha) D2^T
Matrix population_cross_covariance(const Matrix& D1, const Matrix& D2, const SourceModel& sources);

/// Argument of the source CGF for each model: D1^T t1 (+ D1^T(e^t1 - 1) for
/// a Poisson view 1) + the matching view-2 term.
Vector population_h(ModelKind model, const Matrix& D1, const Matrix& D2, const ProcessingPoint& t);

/// Deflated population generalized S-covariance D1 C_alpha(h(t)) D2^T.
Matrix population_gen_cross_covariance(ModelKind model, const Matrix& D1, const Matrix& D2,
                                       const SourceModel& sources, const ProcessingPoint& t);

}  // namespace mmcca
