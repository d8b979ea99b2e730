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

#include <array>
#include <vector>

#include <Eigen/Sparse>

#include "mmcca/linalg.hpp"

namespace mmcca {

using SparseCounts = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// One data view: M variables by N samples, one column per sample. Either a
/// dense real panel or compressed-column nonnegative integer counts.
class ViewMatrix {
 public:
  static ViewMatrix dense(Matrix values);
  /// Throws if any stored entry is negative or non-integral.
  static ViewMatrix counts(SparseCounts values);
  /// Builds a sparse count view from 0-based (variable, sample, count) triplets.
  static ViewMatrix from_triplets(Index M, Index N, const std::vector<Eigen::Triplet<double>>& triplets);

  Index variables() const { return sparse_ ? sparse_values_.rows() : dense_values_.rows(); }
  Index samples() const { return sparse_ ? sparse_values_.cols() : dense_values_.cols(); }
  bool is_sparse() const { return sparse_; }
  /// True when every entry is a nonnegative integer (always for sparse views).
  bool is_count_data() const;

  const Matrix& dense_values() const { return dense_values_; }
  const SparseCounts& sparse_values() const { return sparse_values_; }
  Matrix to_dense() const;
  ViewMatrix to_sparse() const;

  /// t^T x_n for every sample.
  Vector project(const Vector& t) const;
  /// W X for a K x M matrix W.
  Matrix left_multiply(const Matrix& W) const;
  /// X B for an N x k matrix B.
  Matrix right_multiply(const Matrix& B) const;
  Vector sample_mean() const;
  /// Sum over all entries of |x|.
  double abs_sum() const;

 private:
  bool sparse_ = false;
  Matrix dense_values_;
  SparseCounts sparse_values_;
};

/// Which views carry Poisson observations: both (DCCA), neither (NCCA), or
/// only view 2 (MCCA).
enum class ModelKind { dcca, ncca, mcca };

/// Stacked processing point t = [t1; t2].
struct ProcessingPoint {
  Vector t1;
  Vector t2;
};

/// Weights w_n = exp(s_n - max s) normalized to sum 1, for exponents s_n.
/// Throws degenerate_weights for non-finite exponents or when the effective
/// sample size (sum w)^2 / sum w^2 drops below min_effective_samples.
Vector stabilized_weights(const Vector& exponents, double min_effective_samples = 0.0);

Vector gen_expectation_hat(const ViewMatrix& X, const Vector& t);

/// Weight-normalized generalized S-covariance at t (biased at t = 0).
Matrix gen_cross_covariance_hat(const ViewMatrix& X1, const ViewMatrix& X2, const ProcessingPoint& t);

/// Unbiased sample cross-covariance eta1 [X1 X2^T - N mean1 mean2^T].
Matrix s12_hat(const ViewMatrix& X1, const ViewMatrix& X2);

/// The unbiased cross-covariance kept in factored form,
/// eta1 [X1 X2^T - N mean1 mean2^T], applied without materializing it.
class CrossCovarianceOperator final : public LinearOperator {
 public:
  CrossCovarianceOperator(const ViewMatrix& X1, const ViewMatrix& X2);
  Index rows() const override { return X1_.variables(); }
  Index cols() const override { return X2_.variables(); }
  Matrix apply(const Matrix& B) const override;
  Matrix apply_transpose(const Matrix& B) const override;

 private:
  const ViewMatrix& X1_;
  const ViewMatrix& X2_;
  Vector mean1_;
  Vector mean2_;
  double eta1_;
  double n_;
};

struct WhiteningPair;

/// Weighted centered cross-covariance of the projected panels
/// A = W1 diag(s1) X1, B = W2 diag(s2) X2 with weights exp(t^T x). Empty
/// scale vectors mean no deflation. O(R N K) for sparse data.
Matrix whitened_gen_cross_covariance(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W,
                                     const ProcessingPoint& t, const Vector& scale1, const Vector& scale2);

/// W1 T12j(v) W2^T with v = Wj^T u, from data panels (unbiased estimator).
Matrix whitened_t_projection(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W,
                             const Vector& u, int view);

/// Dense order-3 tensor, first index fastest.
class Tensor3 {
 public:
  Tensor3(Index d0, Index d1, Index d2) : dims_{d0, d1, d2}, data_(d0 * d1 * d2, 0.0) {}
  double& operator()(Index i, Index j, Index k) { return data_[i + dims_[0] * (j + dims_[1] * k)]; }
  double operator()(Index i, Index j, Index k) const { return data_[i + dims_[0] * (j + dims_[1] * k)]; }
  Index dim(int axis) const { return dims_[axis]; }

 private:
  std::array<Index, 3> dims_;
  std::vector<double> data_;
};

/// Materialized T-cumulant oracle for tiny problems (M1 M2 Mj <= 1e4).
Tensor3 naive_t_cumulant(const ViewMatrix& X1, const ViewMatrix& X2, int view);

/// [T(v)]_{ab} = sum_c T_{abc} v_c
Matrix project_tensor(const Tensor3& T, const Vector& v);

/// Finite-difference approximation of the whitened T-cumulant projection
/// from generalized covariances at 0 and delta * [v; 0] (or [0; v]).
Matrix gencov_t_approx(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W, const Vector& u,
                       int view, double delta);

}  // namespace mmcca
