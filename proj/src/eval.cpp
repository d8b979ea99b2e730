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
#include "mmcca/eval.hpp"

#include <algorithm>
#include <limits>

#include "mmcca/error.hpp"
#include "mmcca/synthetic.hpp"

namespace mmcca {

std::vector<Index> hungarian(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw Error(Errc::dimension, "assignment cost must be square");
  if (!cost.allFinite()) throw Error(Errc::invalid_argument, "assignment cost must be finite");
  const Index n = cost.rows();
  if (n == 0) return {};

  // Shortest augmenting paths with row/column potentials; index 0 is a
  // virtual column, real rows and columns are 1-based.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  for (Index row = 1; row <= n; ++row) {
    match[0] = row;
    Index col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const Index row0 = match[col0];
      double delta = inf;
      Index col1 = 0;
      for (Index col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double reduced = cost(row0 - 1, col - 1) - u[row0] - v[col];
        if (reduced < minv[col]) {
          minv[col] = reduced;
          way[col] = col0;
        }
        if (minv[col] < delta) {
          delta = minv[col];
          col1 = col;
        }
      }
      for (Index col = 0; col <= n; ++col) {
        if (used[col]) {
          u[match[col]] += delta;
          v[col] -= delta;
        } else {
          minv[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const Index col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }

  std::vector<Index> perm(n);
  for (Index col = 1; col <= n; ++col) perm[match[col] - 1] = col - 1;
  return perm;
}

Matrix l1_cost_matrix(const Matrix& D_hat, const Matrix& D_true, bool allow_sign) {
  if (D_hat.rows() != D_true.rows() || D_hat.cols() != D_true.cols()) {
    throw Error(Errc::dimension, "recovered and true loadings differ in shape");
  }
  const Matrix A = normalize_columns_l1(D_hat);
  const Matrix B = normalize_columns_l1(D_true);
  const Index K = A.cols();
  Matrix cost(K, K);
  for (Index k = 0; k < K; ++k) {
    for (Index j = 0; j < K; ++j) {
      double d = (A.col(j) - B.col(k)).lpNorm<1>();
      if (allow_sign) d = std::min(d, (A.col(j) + B.col(k)).lpNorm<1>());
      cost(k, j) = d;
    }
  }
  return cost;
}

MatchResult l1_error(const Matrix& D_hat, const Matrix& D_true, bool allow_sign) {
  const Matrix cost = l1_cost_matrix(D_hat, D_true, allow_sign);
  const Index K = cost.rows();
  MatchResult result;
  if (K == 0) return result;
  result.permutation = hungarian(cost);
  const Matrix A = normalize_columns_l1(D_hat);
  const Matrix B = normalize_columns_l1(D_true);
  double total = 0.0;
  for (Index k = 0; k < K; ++k) {
    const Index j = result.permutation[k];
    const double plus = (A.col(j) - B.col(k)).lpNorm<1>();
    const double minus = (A.col(j) + B.col(k)).lpNorm<1>();
    const bool flip = allow_sign && minus < plus;
    result.signs.push_back(flip ? -1 : 1);
    total += cost(k, j);
  }
  result.error = total / (2.0 * static_cast<double>(K));
  return result;
}

}  // namespace mmcca
