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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mmcca/linalg.hpp"
#include "mmcca/random.hpp"

namespace testing {

using mmcca::Index;
using mmcca::Matrix;
using mmcca::Vector;

inline Matrix random_matrix(mmcca::Rng& rng, Index rows, Index cols) { return rng.normal_matrix(rows, cols); }

inline Matrix random_rank(mmcca::Rng& rng, Index rows, Index cols, Index rank) {
  return rng.normal_matrix(rows, rank) * rng.normal_matrix(rank, cols);
}

// Random matrix with singular values spread over [1, cond].
inline Matrix random_conditioned(mmcca::Rng& rng, Index n, double cond) {
  Eigen::HouseholderQR<Matrix> qa(rng.normal_matrix(n, n));
  Eigen::HouseholderQR<Matrix> qb(rng.normal_matrix(n, n));
  Vector s(n);
  for (Index i = 0; i < n; ++i) s(i) = n == 1 ? 1.0 : std::pow(cond, static_cast<double>(i) / (n - 1));
  return Matrix(qa.householderQ()) * s.asDiagonal() * Matrix(qb.householderQ()).transpose();
}

inline Matrix random_counts(mmcca::Rng& rng, Index rows, Index cols, double mean) {
  Matrix X(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) X(i, j) = static_cast<double>(rng.poisson(mean));
  return X;
}

inline double max_abs(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff(); }

// Exhaustive minimum of sum_k cost(k, perm[k]).
inline double brute_force_assignment(const Matrix& cost) {
  std::vector<Index> perm(static_cast<std::size_t>(cost.rows()));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = INFINITY;
  do {
    double total = 0.0;
    for (Index k = 0; k < cost.rows(); ++k) total += cost(k, perm[static_cast<std::size_t>(k)]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Column-wise l1 normalization with the sign fixed by the largest entry, so
// two bases equal up to column scaling compare equal.
inline Matrix canonical_columns(const Matrix& A) {
  Matrix B = A;
  for (Index j = 0; j < B.cols(); ++j) {
    Index i = 0;
    B.col(j).cwiseAbs().maxCoeff(&i);
    const double s = (B(i, j) < 0 ? -1.0 : 1.0) / B.col(j).lpNorm<1>();
    B.col(j) *= s;
  }
  return B;
}

// Normalized l1 distance between two bases after the best column matching,
// each column compared up to scale (sign included).
inline double basis_error(const Matrix& A, const Matrix& B) {
  const Matrix a = canonical_columns(A);
  const Matrix b = canonical_columns(B);
  Matrix cost(b.cols(), a.cols());
  for (Index k = 0; k < b.cols(); ++k)
    for (Index j = 0; j < a.cols(); ++j) cost(k, j) = (a.col(j) - b.col(k)).lpNorm<1>();
  return brute_force_assignment(cost) / (2.0 * static_cast<double>(a.cols()));
}

}  // namespace testing
