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
#include "mmcca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "mmcca/error.hpp"
#include "mmcca/random.hpp"

namespace mmcca {

FactoredProduct::FactoredProduct(Matrix L, Matrix R) : L_(std::move(L)), R_(std::move(R)) {
  if (L_.cols() != R_.cols()) {
    throw Error(Errc::dimension, "factored product panels must share their inner dimension");
  }
}

namespace {

Matrix orthonormal_basis(const Matrix& Y) {
  Eigen::HouseholderQR<Matrix> qr(Y);
  return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

// Top-k eigenpairs of a symmetric PSD matrix, largest first.
void top_eigenpairs(const Matrix& G, Index k, Vector& values, Matrix& vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::no_convergence, "symmetric eigensolver failed on Gram matrix");
  }
  const Index n = G.rows();
  values.resize(k);
  vectors.resize(n, k);
  for (Index i = 0; i < k; ++i) {
    values[i] = es.eigenvalues()[n - 1 - i];
    vectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
}

// Given an orthonormal V (cols x k) spanning the dominant right subspace,
// finish the SVD with exact orthonormality: A V = Q R, R = P S Z^T.
TruncatedSvd refine_from_right(const Matrix& A, const Matrix& V0) {
  const Index k = V0.cols();
  const Matrix Y = A * V0;
  Eigen::HouseholderQR<Matrix> qr(Y);
  const Matrix Q = qr.householderQ() * Matrix::Identity(Y.rows(), k);
  const Matrix R = Q.transpose() * Y;
  Eigen::JacobiSVD<Matrix> small(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  TruncatedSvd out;
  out.U = Q * small.matrixU();
  out.singular_values = small.singularValues();
  out.V = V0 * small.matrixV();
  return out;
}

}  // namespace

TruncatedSvd svd_topk(const Matrix& A, Index k) {
  if (k < 1 || k > std::min(A.rows(), A.cols())) {
    throw Error(Errc::dimension, "svd_topk: K=" + std::to_string(k) + " exceeds dimensions " +
                                     std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
  }
  if (A.rows() >= A.cols()) {
    Vector values;
    Matrix V;
    top_eigenpairs(A.transpose() * A, k, values, V);
    return refine_from_right(A, V);
  }
  const Matrix At = A.transpose();
  Vector values;
  Matrix U;
  top_eigenpairs(A * At, k, values, U);
  TruncatedSvd t = refine_from_right(At, U);
  return TruncatedSvd{std::move(t.V), std::move(t.singular_values), std::move(t.U)};
}

TruncatedSvd randomized_svd(const LinearOperator& A, Index k, const RandomizedSvdOptions& options) {
  const Index m = A.rows();
  const Index n = A.cols();
  if (k < 1 || options.oversample < 0 || k > std::min(m, n)) {
    throw Error(Errc::dimension, "randomized_svd: K=" + std::to_string(k) + " exceeds min dimension " +
                                     std::to_string(std::min(m, n)));
  }
  // The sketch cannot exceed the smaller dimension.
  const Index sketch = std::min(k + options.oversample, std::min(m, n));
  Rng rng(options.seed);
  Matrix Y = A.apply(rng.normal_matrix(n, sketch));
  for (int i = 0; i < options.power_iterations; ++i) {
    const Matrix Qy = orthonormal_basis(Y);
    const Matrix Z = orthonormal_basis(A.apply_transpose(Qy));
    Y = A.apply(Z);
  }
  const Matrix Q = orthonormal_basis(Y);
  // B = Q^T A, stored transposed (n x sketch).
  const Matrix Bt = A.apply_transpose(Q);
  Eigen::JacobiSVD<Matrix> small(Bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = small.singularValues();
  if (!(s[0] > 0.0) || !(s[k - 1] > options.rank_tol * s[0])) {
    Index rank = 0;
    while (rank < s.size() && s[rank] > options.rank_tol * s[0] && s[0] > 0.0) ++rank;
    throw Error(Errc::rank_deficient, "randomized_svd: implicit product has effective rank " +
                                          std::to_string(rank) + " < K=" + std::to_string(k));
  }
  TruncatedSvd out;
  out.U = Q * small.matrixV().leftCols(k);
  out.singular_values = s.head(k);
  out.V = small.matrixU().leftCols(k);
  return out;
}

TruncatedSvd randomized_svd_factored(const Matrix& L, const Matrix& R, Index k, Index oversample,
                                     std::uint64_t seed) {
  FactoredProduct op(L, R);
  RandomizedSvdOptions options;
  options.oversample = oversample;
  options.seed = seed;
  return randomized_svd(op, k, options);
}

Eigensystem eig_nonsymmetric(const Matrix& B) {
  if (B.rows() != B.cols() || B.rows() == 0) {
    throw Error(Errc::dimension, "eig_nonsymmetric requires a nonempty square matrix");
  }
  const Index max_iter = 100 * B.rows();
  Eigen::EigenSolver<Matrix> es;
  es.setMaxIterations(max_iter);
  es.compute(B, true);
  if (es.info() != Eigen::Success) {
    throw Error(Errc::no_convergence, "eig_nonsymmetric: shifted QR did not converge within " +
                                          std::to_string(max_iter) + " iterations");
  }
  return Eigensystem{es.eigenvalues(), es.eigenvectors(), max_iter};
}

Matrix pseudo_inverse(const Matrix& A, double rcond) {
  if (A.size() == 0) return Matrix(A.cols(), A.rows());
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double eps = rcond < 0.0 ? std::numeric_limits<double>::epsilon() : rcond;
  const double cutoff = eps * static_cast<double>(std::max(A.rows(), A.cols())) * (s.size() ? s[0] : 0.0);
  Vector inv(s.size());
  for (Index i = 0; i < s.size(); ++i) inv[i] = s[i] > cutoff && s[i] > 0.0 ? 1.0 / s[i] : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double condition_number(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const Vector& s = svd.singularValues();
  if (s.size() == 0) return std::numeric_limits<double>::infinity();
  const double smin = s[s.size() - 1];
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s[0] / smin;
}

Matrix givens_rotation(Index n, Index p, Index q, double theta) {
  Matrix U = Matrix::Identity(n, n);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  U(p, p) = c;
  U(p, q) = s;
  U(q, p) = -s;
  U(q, q) = c;
  return U;
}

Matrix shear_transform(Index n, Index p, Index q, double y) {
  Matrix S = Matrix::Identity(n, n);
  S(p, p) = std::cosh(y);
  S(p, q) = std::sinh(y);
  S(q, p) = std::sinh(y);
  S(q, q) = std::cosh(y);
  return S;
}

double principal_angle(const Matrix& U1, const Matrix& U2) {
  // sin of the largest angle = || (I - U1 U1^T) U2 ||_2
  const Matrix residual = U2 - U1 * (U1.transpose() * U2);
  Eigen::JacobiSVD<Matrix> svd(residual);
  const double s = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  return std::asin(std::min(1.0, s));
}

bool all_finite(const Matrix& A) { return A.allFinite(); }

}  // namespace mmcca
