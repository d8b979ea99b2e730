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
#include "mmcca/moments.hpp"

#include <cmath>
#include <string>

#include "mmcca/error.hpp"
#include "mmcca/whitening.hpp"

namespace mmcca {

namespace {

// Weighted estimates below two effective samples carry no covariance
// information.
constexpr double kMinEffectiveSamples = 2.0;

void require_aligned(const ViewMatrix& X1, const ViewMatrix& X2) {
  if (X1.samples() != X2.samples()) {
    throw Error(Errc::dimension, "views have different sample counts (" + std::to_string(X1.samples()) +
                                     " vs " + std::to_string(X2.samples()) + ")");
  }
}

void require_samples(const ViewMatrix& X, Index minimum, const char* what) {
  if (X.samples() < minimum) {
    throw Error(Errc::insufficient_samples, std::string(what) + " needs at least " + std::to_string(minimum) +
                                                " samples, got " + std::to_string(X.samples()));
  }
}

void require_length(const Vector& v, Index n, const char* what) {
  if (v.size() != n) {
    throw Error(Errc::dimension, std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                                     std::to_string(v.size()));
  }
}

void require_whitening(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W) {
  if (W.W1.cols() != X1.variables() || W.W2.cols() != X2.variables() || W.W1.rows() != W.W2.rows()) {
    throw Error(Errc::dimension, "whitening pair " + std::to_string(W.W1.rows()) + "x" +
                                     std::to_string(W.W1.cols()) + " / " + std::to_string(W.W2.rows()) + "x" +
                                     std::to_string(W.W2.cols()) + " does not match data dimensions " +
                                     std::to_string(X1.variables()) + ", " + std::to_string(X2.variables()));
  }
}

Matrix centered(const Matrix& A, const Vector& mean) { return A.colwise() - mean; }

Vector stacked_exponents(const ViewMatrix& X1, const ViewMatrix& X2, const ProcessingPoint& t) {
  require_length(t.t1, X1.variables(), "processing point t1");
  require_length(t.t2, X2.variables(), "processing point t2");
  return X1.project(t.t1) + X2.project(t.t2);
}

Matrix scaled_columns(const Matrix& W, const Vector& scale) {
  if (scale.size() == 0) return W;
  return W * scale.asDiagonal();
}

}  // namespace

ViewMatrix ViewMatrix::dense(Matrix values) {
  if (!values.allFinite()) throw Error(Errc::invalid_argument, "view contains non-finite entries");
  ViewMatrix v;
  v.sparse_ = false;
  v.dense_values_ = std::move(values);
  return v;
}

ViewMatrix ViewMatrix::counts(SparseCounts values) {
  values.makeCompressed();
  for (Index k = 0; k < values.outerSize(); ++k) {
    for (SparseCounts::InnerIterator it(values, k); it; ++it) {
      const double x = it.value();
      if (!(x >= 0.0) || x != std::floor(x) || !std::isfinite(x)) {
        throw Error(Errc::invalid_argument, "count view entry (" + std::to_string(it.row() + 1) + ", " +
                                                std::to_string(it.col() + 1) +
                                                ") is not a nonnegative integer");
      }
    }
  }
  ViewMatrix v;
  v.sparse_ = true;
  v.sparse_values_ = std::move(values);
  return v;
}

ViewMatrix ViewMatrix::from_triplets(Index M, Index N, const std::vector<Eigen::Triplet<double>>& triplets) {
  SparseCounts S(M, N);
  for (const auto& t : triplets) {
    if (t.row() < 0 || t.row() >= M || t.col() < 0 || t.col() >= N) {
      throw Error(Errc::dimension, "triplet (" + std::to_string(t.row() + 1) + ", " + std::to_string(t.col() + 1) +
                                       ") outside " + std::to_string(M) + "x" + std::to_string(N));
    }
  }
  S.setFromTriplets(triplets.begin(), triplets.end());
  S.prune(0.0);
  return counts(std::move(S));
}

bool ViewMatrix::is_count_data() const {
  if (sparse_) return true;
  for (Index i = 0; i < dense_values_.size(); ++i) {
    const double x = dense_values_.data()[i];
    if (!(x >= 0.0) || x != std::floor(x)) return false;
  }
  return true;
}

Matrix ViewMatrix::to_dense() const { return sparse_ ? Matrix(sparse_values_) : dense_values_; }

ViewMatrix ViewMatrix::to_sparse() const {
  if (sparse_) return *this;
  return counts(dense_values_.sparseView());
}

Vector ViewMatrix::project(const Vector& t) const {
  require_length(t, variables(), "projection");
  if (sparse_) return sparse_values_.transpose() * t;
  return dense_values_.transpose() * t;
}

Matrix ViewMatrix::left_multiply(const Matrix& W) const {
  if (W.cols() != variables()) throw Error(Errc::dimension, "left_multiply: inner dimension mismatch");
  if (sparse_) return W * sparse_values_;
  return W * dense_values_;
}

Matrix ViewMatrix::right_multiply(const Matrix& B) const {
  if (B.rows() != samples()) throw Error(Errc::dimension, "right_multiply: inner dimension mismatch");
  if (sparse_) return sparse_values_ * B;
  return dense_values_ * B;
}

Vector ViewMatrix::sample_mean() const {
  if (samples() == 0) throw Error(Errc::empty_data, "view has no samples");
  return right_multiply(Vector::Constant(samples(), 1.0 / static_cast<double>(samples())));
}

double ViewMatrix::abs_sum() const {
  if (sparse_) {
    double s = 0.0;
    for (Index k = 0; k < sparse_values_.nonZeros(); ++k) s += std::abs(sparse_values_.valuePtr()[k]);
    return s;
  }
  return dense_values_.cwiseAbs().sum();
}

Vector stabilized_weights(const Vector& exponents, double min_effective_samples) {
  if (exponents.size() == 0) throw Error(Errc::empty_data, "no samples to weight");
  if (!exponents.allFinite()) {
    throw Error(Errc::degenerate_weights, "non-finite exponent t^T x; processing point too large for the data scale");
  }
  const double top = exponents.maxCoeff();
  Vector w = (exponents.array() - top).exp().matrix();
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(Errc::degenerate_weights, "all weights underflowed");
  }
  w /= total;
  const double ess = 1.0 / w.squaredNorm();
  if (ess < min_effective_samples) {
    throw Error(Errc::degenerate_weights, "effective sample size " + std::to_string(ess) +
                                              " below " + std::to_string(min_effective_samples) +
                                              "; processing point too large for the data scale");
  }
  return w;
}

Vector gen_expectation_hat(const ViewMatrix& X, const Vector& t) {
  require_samples(X, 1, "generalized expectation");
  const Vector w = stabilized_weights(X.project(t));
  return X.right_multiply(w);
}

Matrix gen_cross_covariance_hat(const ViewMatrix& X1, const ViewMatrix& X2, const ProcessingPoint& t) {
  require_aligned(X1, X2);
  require_samples(X1, 2, "generalized cross-covariance");
  const Vector w = stabilized_weights(stacked_exponents(X1, X2, t), kMinEffectiveSamples);
  const Vector m1 = X1.right_multiply(w);
  const Vector m2 = X2.right_multiply(w);
  if (X1.is_sparse() || X2.is_sparse()) {
    Matrix weighted = X1.right_multiply(w.asDiagonal() * X2.to_dense().transpose());
    return weighted - m1 * m2.transpose();
  }
  const Matrix c1 = centered(X1.dense_values(), m1);
  const Matrix c2 = centered(X2.dense_values(), m2);
  return c1 * w.asDiagonal() * c2.transpose();
}

Matrix s12_hat(const ViewMatrix& X1, const ViewMatrix& X2) {
  require_aligned(X1, X2);
  require_samples(X1, 2, "s12_hat");
  const double n = static_cast<double>(X1.samples());
  const Vector m1 = X1.sample_mean();
  const Vector m2 = X2.sample_mean();
  if (X1.is_sparse() && X2.is_sparse()) {
    const Matrix cross = Matrix(X1.sparse_values() * X2.sparse_values().transpose());
    return (cross - n * m1 * m2.transpose()) / (n - 1.0);
  }
  if (X1.is_sparse() || X2.is_sparse()) {
    const Matrix cross = X1.right_multiply(X2.to_dense().transpose());
    return (cross - n * m1 * m2.transpose()) / (n - 1.0);
  }
  return centered(X1.dense_values(), m1) * centered(X2.dense_values(), m2).transpose() / (n - 1.0);
}

CrossCovarianceOperator::CrossCovarianceOperator(const ViewMatrix& X1, const ViewMatrix& X2)
    : X1_(X1), X2_(X2) {
  require_aligned(X1, X2);
  require_samples(X1, 2, "cross-covariance operator");
  mean1_ = X1.sample_mean();
  mean2_ = X2.sample_mean();
  n_ = static_cast<double>(X1.samples());
  eta1_ = 1.0 / (n_ - 1.0);
}

Matrix CrossCovarianceOperator::apply(const Matrix& B) const {
  if (B.rows() != X2_.variables()) throw Error(Errc::dimension, "cross-covariance apply: dimension mismatch");
  const Matrix inner = X2_.left_multiply(B.transpose()).transpose();  // X2^T B, N x k
  return eta1_ * (X1_.right_multiply(inner) - n_ * mean1_ * (mean2_.transpose() * B));
}

Matrix CrossCovarianceOperator::apply_transpose(const Matrix& B) const {
  if (B.rows() != X1_.variables()) throw Error(Errc::dimension, "cross-covariance apply: dimension mismatch");
  const Matrix inner = X1_.left_multiply(B.transpose()).transpose();  // X1^T B
  return eta1_ * (X2_.right_multiply(inner) - n_ * mean2_ * (mean1_.transpose() * B));
}

Matrix whitened_gen_cross_covariance(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W,
                                     const ProcessingPoint& t, const Vector& scale1, const Vector& scale2) {
  require_aligned(X1, X2);
  require_samples(X1, 2, "generalized cross-covariance");
  require_whitening(X1, X2, W);
  if (scale1.size() != 0) require_length(scale1, X1.variables(), "left scale");
  if (scale2.size() != 0) require_length(scale2, X2.variables(), "right scale");
  const Vector w = stabilized_weights(stacked_exponents(X1, X2, t), kMinEffectiveSamples);
  const Matrix A = X1.left_multiply(scaled_columns(W.W1, scale1));
  const Matrix B = X2.left_multiply(scaled_columns(W.W2, scale2));
  const Matrix Ac = centered(A, A * w);
  const Matrix Bc = centered(B, B * w);
  return Ac * w.asDiagonal() * Bc.transpose();
}

Matrix whitened_t_projection(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W,
                             const Vector& u, int view) {
  require_aligned(X1, X2);
  require_whitening(X1, X2, W);
  require_samples(X1, 3, "T-cumulant estimator");
  require_length(u, W.k(), "projection vector u");
  if (view != 1 && view != 2) throw Error(Errc::invalid_argument, "view index must be 1 or 2");

  const double n = static_cast<double>(X1.samples());
  const double eta1 = 1.0 / (n - 1.0);
  const double eta2 = n / ((n - 1.0) * (n - 2.0));
  const Matrix& Wj = view == 1 ? W.W1 : W.W2;
  const ViewMatrix& Xj = view == 1 ? X1 : X2;
  const Vector v = Wj.transpose() * u;

  const Matrix A = X1.left_multiply(W.W1);
  const Matrix B = X2.left_multiply(W.W2);
  const Vector c = Xj.project(v);
  const Matrix Ac = centered(A, A.rowwise().mean());
  const Matrix Bc = centered(B, B.rowwise().mean());
  const Vector cc = c.array() - c.mean();

  Matrix result = eta2 * (Ac * cc.asDiagonal() * Bc.transpose());

  // Poisson correction: W1 diag(v) S12 W2^T (view 1) or W1 S12 diag(v) W2^T.
  if (view == 1) {
    const Matrix Av = X1.left_multiply(W.W1 * v.asDiagonal());
    result -= eta1 * (centered(Av, Av.rowwise().mean()) * Bc.transpose());
  } else {
    const Matrix Bv = X2.left_multiply(W.W2 * v.asDiagonal());
    result -= eta1 * (Ac * centered(Bv, Bv.rowwise().mean()).transpose());
  }
  return result;
}

Tensor3 naive_t_cumulant(const ViewMatrix& X1, const ViewMatrix& X2, int view) {
  require_aligned(X1, X2);
  require_samples(X1, 3, "naive T-cumulant");
  if (view != 1 && view != 2) throw Error(Errc::invalid_argument, "view index must be 1 or 2");
  const Index M1 = X1.variables();
  const Index M2 = X2.variables();
  const Index Mj = view == 1 ? M1 : M2;
  if (M1 * M2 * Mj > 10000) {
    throw Error(Errc::size_limit, "naive T-cumulant limited to 1e4 tensor entries, requested " +
                                      std::to_string(M1 * M2 * Mj));
  }
  const Matrix D1 = X1.to_dense();
  const Matrix D2 = X2.to_dense();
  const Index N = X1.samples();
  const double n = static_cast<double>(N);
  const Matrix C1 = centered(D1, D1.rowwise().mean());
  const Matrix C2 = centered(D2, D2.rowwise().mean());
  const Matrix& Cj = view == 1 ? C1 : C2;
  const double eta2 = n / ((n - 1.0) * (n - 2.0));

  Matrix cov(M1, M2);
  for (Index a = 0; a < M1; ++a) {
    for (Index b = 0; b < M2; ++b) {
      double s = 0.0;
      for (Index i = 0; i < N; ++i) s += C1(a, i) * C2(b, i);
      cov(a, b) = s / (n - 1.0);
    }
  }

  Tensor3 T(M1, M2, Mj);
  for (Index a = 0; a < M1; ++a) {
    for (Index b = 0; b < M2; ++b) {
      for (Index c = 0; c < Mj; ++c) {
        double s = 0.0;
        for (Index i = 0; i < N; ++i) s += C1(a, i) * C2(b, i) * Cj(c, i);
        double value = eta2 * s;
        const Index repeated = view == 1 ? a : b;
        if (repeated == c) value -= cov(a, b);
        T(a, b, c) = value;
      }
    }
  }
  return T;
}

Matrix project_tensor(const Tensor3& T, const Vector& v) {
  require_length(v, T.dim(2), "tensor projection vector");
  Matrix out = Matrix::Zero(T.dim(0), T.dim(1));
  for (Index c = 0; c < T.dim(2); ++c) {
    for (Index b = 0; b < T.dim(1); ++b) {
      for (Index a = 0; a < T.dim(0); ++a) out(a, b) += T(a, b, c) * v[c];
    }
  }
  return out;
}

Matrix gencov_t_approx(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W, const Vector& u,
                       int view, double delta) {
  require_whitening(X1, X2, W);
  require_length(u, W.k(), "projection vector u");
  if (view != 1 && view != 2) throw Error(Errc::invalid_argument, "view index must be 1 or 2");
  if (!(delta > 0.0)) throw Error(Errc::invalid_argument, "delta must be positive");
  const Vector v = (view == 1 ? W.W1 : W.W2).transpose() * u;

  ProcessingPoint origin{Vector::Zero(X1.variables()), Vector::Zero(X2.variables())};
  ProcessingPoint shifted = origin;
  (view == 1 ? shifted.t1 : shifted.t2) = delta * v;

  const Vector none;
  const Matrix at_origin = whitened_gen_cross_covariance(X1, X2, W, origin, none, none);
  const Matrix at_shift = whitened_gen_cross_covariance(X1, X2, W, shifted, none, none);
  const Matrix correction = view == 1 ? whitened_gen_cross_covariance(X1, X2, W, origin, v, none)
                                      : whitened_gen_cross_covariance(X1, X2, W, origin, none, v);
  return (at_shift - at_origin) / delta - correction;
}

}  // namespace mmcca
