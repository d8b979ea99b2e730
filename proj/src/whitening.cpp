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
#include "mmcca/whitening.hpp"

#include <algorithm>
#include <string>

#include "mmcca/error.hpp"

namespace mmcca {

namespace {

double default_tol(const WhiteningOptions& options) {
  if (options.rank_tol >= 0.0) return options.rank_tol;
  return options.method == WhiteningMethod::exact ? 1e-10 : 1e-6;
}

WhiteningPair from_svd(const TruncatedSvd& svd, Index K, double tol) {
  const Vector& s = svd.singular_values;
  if (!(s[0] > 0.0) || !(s[K - 1] > tol * s[0])) {
    Index rank = 0;
    while (rank < K && s[0] > 0.0 && s[rank] > tol * s[0]) ++rank;
    throw Error(Errc::rank_deficient, "cross-covariance has effective rank " + std::to_string(rank) +
                                          " < K=" + std::to_string(K) + " (relative tolerance " +
                                          std::to_string(tol) + ")");
  }
  const Vector scale = s.head(K).cwiseSqrt().cwiseInverse();
  WhiteningPair W;
  W.W1 = scale.asDiagonal() * svd.U.leftCols(K).transpose();
  W.W2 = scale.asDiagonal() * svd.V.leftCols(K).transpose();
  W.singular_values = s.head(K);
  return W;
}

void require_k(Index rows, Index cols, Index K) {
  if (K < 1 || K > std::min(rows, cols)) {
    throw Error(Errc::dimension, "K=" + std::to_string(K) + " must lie in [1, min(M1, M2)=" +
                                     std::to_string(std::min(rows, cols)) + "]");
  }
}

}  // namespace

WhiteningPair compute_whitening(const Matrix& s12, Index K, const WhiteningOptions& options) {
  require_k(s12.rows(), s12.cols(), K);
  if (options.method == WhiteningMethod::randomized) {
    DenseOperator op(s12);
    return compute_whitening(op, K, options);
  }
  return from_svd(svd_topk(s12, K), K, default_tol(options));
}

WhiteningPair compute_whitening(const LinearOperator& s12, Index K, const WhiteningOptions& options) {
  require_k(s12.rows(), s12.cols(), K);
  const double tol = default_tol(options);
  if (options.method == WhiteningMethod::exact) {
    const Matrix dense = s12.apply(Matrix::Identity(s12.cols(), s12.cols()));
    return from_svd(svd_topk(dense, K), K, tol);
  }
  RandomizedSvdOptions rs;
  // The sketch cannot exceed the smaller dimension.
  rs.oversample = std::min(options.oversample, std::min(s12.rows(), s12.cols()) - K);
  rs.power_iterations = options.power_iterations;
  rs.seed = options.seed;
  rs.rank_tol = tol;
  return from_svd(randomized_svd(s12, K, rs), K, tol);
}

double whitening_residual(const Matrix& s12, const WhiteningPair& W) {
  return (W.W1 * s12 * W.W2.transpose() - Matrix::Identity(W.k(), W.k())).norm();
}

double whitening_residual(const LinearOperator& s12, const WhiteningPair& W) {
  return (W.W1 * s12.apply(W.W2.transpose()) - Matrix::Identity(W.k(), W.k())).norm();
}

}  // namespace mmcca
