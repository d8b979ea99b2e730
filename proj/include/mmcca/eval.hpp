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

#include <vector>

#include "mmcca/linalg.hpp"

namespace mmcca {

struct MatchResult {
  /// Mean matched column l1 distance over 2, in [0, 1].
  double error = 0.0;
  /// permutation[k] is the recovered column matched to true column k.
  std::vector<Index> permutation;
  /// Sign applied to each matched recovered column (all +1 without sign matching).
  std::vector<int> signs;
};

/// Assignment minimizing sum_k cost(k, perm[k]) for a square finite cost.
std::vector<Index> hungarian(const Matrix& cost);

/// Normalized l1 error between column-normalized D_hat and D_true, minimized
/// over column permutations and, with allow_sign, per-column signs.
MatchResult l1_error(const Matrix& D_hat, const Matrix& D_true, bool allow_sign = false);

/// The matching cost: entry (k, j) is the l1 distance between true column k
/// and recovered column j (sign-minimized with allow_sign).
Matrix l1_cost_matrix(const Matrix& D_hat, const Matrix& D_true, bool allow_sign = false);

}  // namespace mmcca
