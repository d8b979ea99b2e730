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
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "mmcca/error.hpp"
#include "mmcca/moments.hpp"
#include "mmcca/whitening.hpp"

using namespace mmcca;
using testing::max_abs;

namespace {

template <typename F>
bool throws_code(Errc code, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

Matrix row_vector(std::initializer_list<double> values) {
  Matrix A(1, static_cast<Index>(values.size()));
  Index j = 0;
  for (double v : values) A(0, j++) = v;
  return A;
}

// Direct weighted sums with unstabilized weights exp(t^T x_n).
Matrix brute_force_gencov(const Matrix& X1, const Matrix& X2, const Vector& t1, const Vector& t2) {
  const Index N = X1.cols();
  double total = 0.0;
  Vector m1 = Vector::Zero(X1.rows()), m2 = Vector::Zero(X2.rows());
  Matrix cross = Matrix::Zero(X1.rows(), X2.rows());
  for (Index n = 0; n < N; ++n) {
    const double w = std::exp(t1.dot(X1.col(n)) + t2.dot(X2.col(n)));
    total += w;
    m1 += w * X1.col(n);
    m2 += w * X2.col(n);
    cross += w * X1.col(n) * X2.col(n).transpose();
  }
  m1 /= total;
  m2 /= total;
  return cross / total - m1 * m2.transpose();
}

WhiteningPair arbitrary_pair(Rng& rng, Index K, Index M1, Index M2) {
  WhiteningPair W;
  W.W1 = rng.normal_matrix(K, M1);
  W.W2 = rng.normal_matrix(K, M2);
  W.singular_values = Vector::Ones(K);
  return W;
}

Matrix tensor_oracle(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W, const Vector& u, int view) {
  const Vector v = (view == 1 ? W.W1 : W.W2).transpose() * u;
  return W.W1 * project_tensor(naive_t_cumulant(X1, X2, view), v) * W.W2.transpose();
}

Matrix permute_columns(const Matrix& X, const std::vector<Index>& perm) {
  Matrix Y(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) Y.col(j) = X.col(perm[static_cast<std::size_t>(j)]);
  return Y;
}

}  // namespace

TEST_CASE("views validate counts and convert between layouts") {
  std::vector<Eigen::Triplet<double>> trip{{0, 0, 2.0}, {2, 1, 1.0}, {2, 1, 3.0}};
  const ViewMatrix X = ViewMatrix::from_triplets(3, 2, trip);
  CHECK(X.is_sparse());
  CHECK(X.is_count_data());
  CHECK(X.to_dense()(2, 1) == 4.0);
  CHECK(X.abs_sum() == 6.0);
  CHECK(ViewMatrix::dense(X.to_dense()).to_sparse().sparse_values().nonZeros() == 2);
  CHECK_FALSE(ViewMatrix::dense(row_vector({0.5, 1.0})).is_count_data());
  CHECK(ViewMatrix::dense(row_vector({2.0, 1.0})).is_count_data());
  SparseCounts bad(1, 1);
  bad.insert(0, 0) = -1.0;
  CHECK_THROWS_AS(ViewMatrix::counts(bad), Error);
}

TEST_CASE("stabilized weights survive huge exponents") {
  Vector s(3);
  s << 1000.0, 1000.0 + std::log(3.0), -5000.0;
  const Vector w = stabilized_weights(s);
  CHECK(w(0) == doctest::Approx(0.25));
  CHECK(w(1) == doctest::Approx(0.75));
  CHECK(w(2) == 0.0);
  CHECK(throws_code(Errc::degenerate_weights, [&] { stabilized_weights(s, 2.0); }));
  s(0) = INFINITY;
  CHECK(throws_code(Errc::degenerate_weights, [&] { stabilized_weights(s); }));
}

TEST_CASE("gen_expectation_hat examples") {
  Rng rng(1);
  const Matrix X = rng.normal_matrix(3, 7);
  const ViewMatrix V = ViewMatrix::dense(X);
  CHECK(max_abs(gen_expectation_hat(V, Vector::Zero(3)) - X.rowwise().mean()) < 1e-15);

  Matrix single(2, 1);
  single << 1.0, 2.0;
  Vector t(2);
  t << 40.0, -3.0;
  CHECK(max_abs(gen_expectation_hat(ViewMatrix::dense(single), t) - single.col(0)) < 1e-15);

  Vector ln3(1);
  ln3 << std::log(3.0);
  CHECK(gen_expectation_hat(ViewMatrix::dense(row_vector({0.0, 1.0})), ln3)(0) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("gen_cross_covariance_hat matches the brute-force sum on N = 3") {
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix X1 = testing::random_counts(rng, 3, 3, 2.0);
    const Matrix X2 = testing::random_counts(rng, 2, 3, 2.0);
    ProcessingPoint t{0.3 * rng.normal_matrix(3, 1).col(0), 0.3 * rng.normal_matrix(2, 1).col(0)};
    const Matrix expect = brute_force_gencov(X1, X2, t.t1, t.t2);
    double ess_ok = true;
    try {
      const Matrix got = gen_cross_covariance_hat(ViewMatrix::dense(X1), ViewMatrix::dense(X2), t);
      CHECK(max_abs(got - expect) < 1e-12 * std::max(1.0, max_abs(expect)));
      const Matrix sparse = gen_cross_covariance_hat(ViewMatrix::dense(X1).to_sparse(), ViewMatrix::dense(X2), t);
      CHECK(max_abs(sparse - got) < 1e-12 * std::max(1.0, max_abs(got)));
    } catch (const Error& e) {
      ess_ok = false;
      CHECK(e.code() == Errc::degenerate_weights);
    }
    (void)ess_ok;
  }
}

TEST_CASE("gen_cross_covariance_hat at zero is the biased sample covariance") {
  Rng rng(3);
  const Matrix X1 = rng.normal_matrix(4, 9);
  const Matrix X2 = rng.normal_matrix(3, 9);
  const ViewMatrix A = ViewMatrix::dense(X1), B = ViewMatrix::dense(X2);
  const ProcessingPoint zero{Vector::Zero(4), Vector::Zero(3)};
  CHECK(max_abs(gen_cross_covariance_hat(A, B, zero) - s12_hat(A, B) * (8.0 / 9.0)) < 1e-12);
}

TEST_CASE("constant second view gives zero covariances") {
  Rng rng(4);
  const ViewMatrix A = ViewMatrix::dense(rng.normal_matrix(3, 6));
  const ViewMatrix B = ViewMatrix::dense(Matrix::Constant(2, 6, 5.0));
  const ProcessingPoint t{0.2 * Vector::Ones(3), 0.1 * Vector::Ones(2)};
  CHECK(max_abs(gen_cross_covariance_hat(A, B, t)) < 1e-12);
  CHECK(max_abs(s12_hat(A, B)) < 1e-12);
}

TEST_CASE("estimators need enough samples") {
  const ViewMatrix one = ViewMatrix::dense(row_vector({1.0}));
  const ProcessingPoint zero{Vector::Zero(1), Vector::Zero(1)};
  CHECK(throws_code(Errc::insufficient_samples, [&] { gen_cross_covariance_hat(one, one, zero); }));
  CHECK(throws_code(Errc::insufficient_samples, [&] { s12_hat(one, one); }));
  const ViewMatrix two = ViewMatrix::dense(row_vector({1.0, 2.0}));
  CHECK(throws_code(Errc::dimension, [&] { s12_hat(one, two); }));
}

TEST_CASE("s12_hat of the pairs (1,2), (3,4) is 2") {
  const ViewMatrix A = ViewMatrix::dense(row_vector({1.0, 3.0}));
  const ViewMatrix B = ViewMatrix::dense(row_vector({2.0, 4.0}));
  CHECK(s12_hat(A, B)(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("s12_hat is unbiased in Monte Carlo") {
  // x1 = z + e1, x2 = 2 z + e2 with standard normals: cov = 2.
  Rng rng(5);
  const int reps = 10000;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    Matrix X1(1, 5), X2(1, 5);
    for (Index n = 0; n < 5; ++n) {
      const double z = rng.normal();
      X1(0, n) = z + rng.normal();
      X2(0, n) = 2.0 * z + rng.normal();
    }
    const double c = s12_hat(ViewMatrix::dense(X1), ViewMatrix::dense(X2))(0, 0);
    s += c;
    s2 += c * c;
  }
  const double mean = s / reps;
  const double se = std::sqrt((s2 / reps - mean * mean) / reps);
  CHECK(std::abs(mean - 2.0) <= 3.0 * se);
}

TEST_CASE("cross-covariance operator applies s12_hat") {
  Rng rng(6);
  const ViewMatrix A = ViewMatrix::dense(testing::random_counts(rng, 5, 12, 1.5)).to_sparse();
  const ViewMatrix B = ViewMatrix::dense(rng.normal_matrix(4, 12));
  const CrossCovarianceOperator op(A, B);
  const Matrix S = s12_hat(A, B);
  const Matrix R = rng.normal_matrix(4, 3);
  const Matrix L = rng.normal_matrix(5, 2);
  CHECK(max_abs(op.apply(R) - S * R) < 1e-12 * max_abs(S * R));
  CHECK(max_abs(op.apply_transpose(L) - S.transpose() * L) < 1e-12 * max_abs(S.transpose() * L));
}

TEST_CASE("sample order does not change the estimators") {
  Rng rng(7);
  const Matrix X1 = testing::random_counts(rng, 3, 10, 2.0);
  const Matrix X2 = testing::random_counts(rng, 4, 10, 2.0);
  std::vector<Index> perm(10);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[1], perm[6]);
  const ProcessingPoint t{0.05 * Vector::Ones(3), -0.04 * Vector::Ones(4)};
  const ViewMatrix A = ViewMatrix::dense(X1), B = ViewMatrix::dense(X2);
  const ViewMatrix Ap = ViewMatrix::dense(permute_columns(X1, perm)), Bp = ViewMatrix::dense(permute_columns(X2, perm));
  CHECK(max_abs(gen_expectation_hat(A, t.t1) - gen_expectation_hat(Ap, t.t1)) < 1e-13);
  CHECK(max_abs(gen_cross_covariance_hat(A, B, t) - gen_cross_covariance_hat(Ap, Bp, t)) < 1e-12);
}

TEST_CASE("whitened generalized covariance equals whitening the dense estimate") {
  Rng rng(8);
  const Matrix X1 = testing::random_counts(rng, 4, 30, 3.0);
  const Matrix X2 = testing::random_counts(rng, 3, 30, 3.0);
  const WhiteningPair W = arbitrary_pair(rng, 2, 4, 3);
  const ProcessingPoint t{0.05 * rng.normal_matrix(4, 1).col(0), 0.05 * rng.normal_matrix(3, 1).col(0)};
  const Vector s1 = (-t.t1.array()).exp().matrix();
  const Vector s2 = (-t.t2.array()).exp().matrix();
  const ViewMatrix A = ViewMatrix::dense(X1).to_sparse(), B = ViewMatrix::dense(X2).to_sparse();
  const Matrix oracle = W.W1 * s1.asDiagonal() * brute_force_gencov(X1, X2, t.t1, t.t2) * s2.asDiagonal() *
                        W.W2.transpose();
  CHECK(max_abs(whitened_gen_cross_covariance(A, B, W, t, s1, s2) - oracle) < 1e-10 * max_abs(oracle));
  const Matrix plain = W.W1 * brute_force_gencov(X1, X2, t.t1, t.t2) * W.W2.transpose();
  CHECK(max_abs(whitened_gen_cross_covariance(A, B, W, t, Vector(), Vector()) - plain) < 1e-10 * max_abs(plain));
}

TEST_CASE("k-statistic oracle on N = 3 scalar views") {
  // Centered x1 = (-4/3, -1/3, 5/3), x2 = (-2, 1, 1): k3 = 1.5 * (-2/3) = -1,
  // cov = 2, and the repeated index subtracts the covariance.
  const ViewMatrix A = ViewMatrix::dense(row_vector({1.0, 2.0, 4.0}));
  const ViewMatrix B = ViewMatrix::dense(row_vector({0.0, 3.0, 3.0}));
  const Tensor3 T1 = naive_t_cumulant(A, B, 1);
  CHECK(T1(0, 0, 0) == doctest::Approx(-3.0).epsilon(1e-14));
  // View 2: sum c1 c2 c2 = (-4/3)(4) + (-1/3)(1) + (5/3)(1) = -4, k3 = -6.
  const Tensor3 T2 = naive_t_cumulant(A, B, 2);
  CHECK(T2(0, 0, 0) == doctest::Approx(-8.0).epsilon(1e-14));
}

TEST_CASE("constant data has zero T-cumulants") {
  const ViewMatrix A = ViewMatrix::dense(Matrix::Constant(2, 5, 3.0));
  const ViewMatrix B = ViewMatrix::dense(Matrix::Constant(3, 5, 1.0));
  const Tensor3 T = naive_t_cumulant(A, B, 2);
  for (Index a = 0; a < 2; ++a)
    for (Index b = 0; b < 3; ++b)
      for (Index c = 0; c < 3; ++c) CHECK(T(a, b, c) == 0.0);
  Rng rng(9);
  const WhiteningPair W = arbitrary_pair(rng, 2, 2, 3);
  const Vector u = Vector::Ones(2);
  CHECK(max_abs(whitened_t_projection(A, B, W, u, 1)) < 1e-12);
  CHECK(max_abs(gencov_t_approx(A, B, W, u, 1, 0.1)) < 1e-12);
}

TEST_CASE("project_tensor examples") {
  Tensor3 T(2, 3, 4);
  CHECK(max_abs(project_tensor(T, Vector::Ones(4))) == 0.0);
  T(0, 1, 2) = 5.0;
  Vector e3 = Vector::Zero(4);
  e3(2) = 1.0;
  const Matrix P = project_tensor(T, e3);
  CHECK(P(0, 1) == 5.0);
  CHECK(P.cwiseAbs().sum() == 5.0);
  CHECK_THROWS_AS(project_tensor(T, Vector::Ones(3)), Error);

  Rng rng(10);
  for (Index a = 0; a < 2; ++a)
    for (Index b = 0; b < 3; ++b)
      for (Index c = 0; c < 4; ++c) T(a, b, c) = rng.normal();
  const Vector v = rng.normal_matrix(4, 1).col(0);
  const Matrix Q = project_tensor(T, v);
  for (Index a = 0; a < 2; ++a) {
    for (Index b = 0; b < 3; ++b) {
      double s = 0.0;
      for (Index c = 0; c < 4; ++c) s += T(a, b, c) * v(c);
      CHECK(std::abs(Q(a, b) - s) < 1e-14);
    }
  }
}

TEST_CASE("naive tensor refuses large problems") {
  const ViewMatrix A = ViewMatrix::dense(Matrix::Ones(30, 4));
  CHECK(throws_code(Errc::size_limit, [&] { naive_t_cumulant(A, A, 1); }));
}

TEST_CASE("whitened T projection equals the naive tensor on tiny instances") {
  Rng rng(11);
  for (int rep = 0; rep < 40; ++rep) {
    const Index M1 = 1 + rep % 4, M2 = 1 + (rep / 4) % 4, K = 1 + rep % 2;
    const Index N = 3 + rep % 18;
    const Matrix X1 = testing::random_counts(rng, M1, N, 2.0);
    const Matrix X2 = testing::random_counts(rng, M2, N, 2.0);
    const ViewMatrix A = ViewMatrix::dense(X1), B = ViewMatrix::dense(X2);
    const WhiteningPair W = arbitrary_pair(rng, K, M1, M2);
    const Vector u = rng.normal_matrix(K, 1).col(0);
    for (int view : {1, 2}) {
      const Matrix oracle = tensor_oracle(A, B, W, u, view);
      const Matrix fast = whitened_t_projection(A.to_sparse(), B.to_sparse(), W, u, view);
      CHECK(max_abs(fast - oracle) < 1e-10 * std::max(1.0, max_abs(oracle)));
      const Matrix dense = whitened_t_projection(A, B, W, u, view);
      CHECK(max_abs(dense - fast) < 1e-12 * std::max(1.0, max_abs(fast)));
    }
  }
}

TEST_CASE("whitened T projection is linear in u") {
  Rng rng(12);
  const ViewMatrix A = ViewMatrix::dense(testing::random_counts(rng, 5, 40, 3.0)).to_sparse();
  const ViewMatrix B = ViewMatrix::dense(testing::random_counts(rng, 6, 40, 3.0)).to_sparse();
  const WhiteningPair W = arbitrary_pair(rng, 3, 5, 6);
  const Vector u = rng.normal_matrix(3, 1).col(0), w = rng.normal_matrix(3, 1).col(0);
  for (int view : {1, 2}) {
    const Matrix lhs = whitened_t_projection(A, B, W, 2.0 * u - 0.5 * w, view);
    const Matrix rhs = 2.0 * whitened_t_projection(A, B, W, u, view) - 0.5 * whitened_t_projection(A, B, W, w, view);
    CHECK(max_abs(lhs - rhs) < 1e-10 * std::max(1.0, max_abs(rhs)));
    CHECK(max_abs(whitened_t_projection(A, B, W, Vector::Zero(3), view)) == 0.0);
    CHECK(max_abs(gencov_t_approx(A, B, W, Vector::Zero(3), view, 0.1)) < 1e-12);
  }
  CHECK(throws_code(Errc::dimension, [&] { whitened_t_projection(A, B, W, Vector::Zero(2), 1); }));
}

TEST_CASE("finite-difference approximation tracks the T projection as delta shrinks") {
  Rng rng(13);
  const Index N = 4000;
  // Poisson counts with a shared gamma factor so the third cumulants are nonzero.
  Matrix X1(3, N), X2(3, N);
  for (Index n = 0; n < N; ++n) {
    const double a = rng.gamma(0.5, 0.25);
    for (Index m = 0; m < 3; ++m) {
      X1(m, n) = static_cast<double>(rng.poisson(0.3 * (m + 1) * a + 0.5));
      X2(m, n) = static_cast<double>(rng.poisson(0.2 * (3 - m) * a + 0.5));
    }
  }
  const ViewMatrix A = ViewMatrix::dense(X1).to_sparse(), B = ViewMatrix::dense(X2).to_sparse();
  WhiteningPair W = arbitrary_pair(rng, 1, 3, 3);
  W.W1 = W.W1.cwiseAbs() / W.W1.cwiseAbs().sum();
  W.W2 = W.W2.cwiseAbs() / W.W2.cwiseAbs().sum();
  const Vector u = Vector::Ones(1);
  const Matrix exact = whitened_t_projection(A, B, W, u, 1);
  double previous = INFINITY;
  for (double delta : {0.2, 0.1, 0.05}) {
    const double gap = (gencov_t_approx(A, B, W, u, 1, delta) - exact).norm();
    CHECK(gap < previous);
    previous = gap;
  }
}
