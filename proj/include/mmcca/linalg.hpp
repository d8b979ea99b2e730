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

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace mmcca {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Top-K singular triplets. Columns of U and V are orthonormal and the
/// singular values are sorted nonincreasing.
struct TruncatedSvd {
  Matrix U;
  Vector singular_values;
  Matrix V;
};

/// Abstract real matrix that can only be applied. Lets the cross-covariance
/// estimator feed the randomized SVD without forming an M1 x M2 matrix.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  /// A * B
  virtual Matrix apply(const Matrix& B) const = 0;
  /// A^T * B
  virtual Matrix apply_transpose(const Matrix& B) const = 0;
};

/// Dense matrix viewed as an operator.
class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(const Matrix& A) : A_(A) {}
  Index rows() const override { return A_.rows(); }
  Index cols() const override { return A_.cols(); }
  Matrix apply(const Matrix& B) const override { return A_ * B; }
  Matrix apply_transpose(const Matrix& B) const override { return A_.transpose() * B; }

 private:
  const Matrix& A_;
};

/// Implicit product L * R^T.
class FactoredProduct final : public LinearOperator {
 public:
  FactoredProduct(Matrix L, Matrix R);
  Index rows() const override { return L_.rows(); }
  Index cols() const override { return R_.rows(); }
  Matrix apply(const Matrix& B) const override { return L_ * (R_.transpose() * B); }
  Matrix apply_transpose(const Matrix& B) const override { return R_ * (L_.transpose() * B); }
  Matrix dense() const { return L_ * R_.transpose(); }

 private:
  Matrix L_;
  Matrix R_;
};

/// Best rank-K approximation of A. Uses the Gram matrix of the smaller side
/// followed by a QR / small-SVD refinement so that U Sigma = A V holds with
/// exactly orthonormal factors.
TruncatedSvd svd_topk(const Matrix& A, Index k);

struct RandomizedSvdOptions {
  Index oversample = 10;
  int power_iterations = 1;
  std::uint64_t seed = 0x5eed;
  /// sigma_K <= rank_tol * sigma_1 is reported as rank deficiency.
  double rank_tol = 1e-10;
};

/// Randomized range finder with Gaussian test matrices and optional power
/// iterations, followed by an exact SVD of the projected panel. The sketch
/// width K + oversample is capped at the smaller dimension.
TruncatedSvd randomized_svd(const LinearOperator& A, Index k, const RandomizedSvdOptions& options = {});

/// Randomized SVD of the implicit product L * R^T.
TruncatedSvd randomized_svd_factored(const Matrix& L, const Matrix& R, Index k, Index oversample,
                                     std::uint64_t seed = 0x5eed);

struct Eigensystem {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
  Index iterations = 0;
};

/// Eigendecomposition of a general real square matrix via Hessenberg
/// reduction and shifted QR (at most 100 * K iterations).
Eigensystem eig_nonsymmetric(const Matrix& B);

/// Moore-Penrose pseudo-inverse. Singular values below
/// rcond * max(rows, cols) * sigma_1 are treated as zero; rcond < 0 selects
/// machine epsilon.
Matrix pseudo_inverse(const Matrix& A, double rcond = -1.0);

/// 2-norm condition number; infinity for singular input.
double condition_number(const Matrix& A);

/// Identity except [[c, s], [-s, c]] in the (p, q) plane.
Matrix givens_rotation(Index n, Index p, Index q, double theta);

/// Identity except [[cosh y, sinh y], [sinh y, cosh y]] in the (p, q) plane.
Matrix shear_transform(Index n, Index p, Index q, double y);

/// Largest principal angle between the column spans of two orthonormal bases.
double principal_angle(const Matrix& U1, const Matrix& U2);

bool all_finite(const Matrix& A);

}  // namespace mmcca
