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

namespace mmcca {

/// W1 (K x M1) and W2 (K x M2) with W1 S12 W2^T = I_K.
struct WhiteningPair {
  Matrix W1;
  Matrix W2;
  Vector singular_values;

  Index k() const { return W1.rows(); }
};

enum class WhiteningMethod { exact, randomized };

struct WhiteningOptions {
  WhiteningMethod method = WhiteningMethod::exact;
  /// sigma_K must exceed rank_tol * sigma_1. Negative picks the method
  /// default (1e-10 exact, 1e-6 randomized).
  double rank_tol = -1.0;
  Index oversample = 10;
  int power_iterations = 1;
  std::uint64_t seed = 0x5eed;
};

/// Whitening from a dense cross-covariance. The randomized method treats the
/// dense matrix as an operator.
WhiteningPair compute_whitening(const Matrix& s12, Index K, const WhiteningOptions& options = {});

/// Whitening from an implicit cross-covariance (randomized SVD unless the
/// method is exact, in which case the operator is densified).
WhiteningPair compute_whitening(const LinearOperator& s12, Index K, const WhiteningOptions& options = {});

/// || W1 S12 W2^T - I ||_F
double whitening_residual(const Matrix& s12, const WhiteningPair& W);
double whitening_residual(const LinearOperator& s12, const WhiteningPair& W);

}  // namespace mmcca
