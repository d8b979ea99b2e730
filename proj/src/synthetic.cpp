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
#include "mmcca/synthetic.hpp"

#include <string>
#include <vector>

#include "mmcca/error.hpp"
#include "mmcca/random.hpp"

namespace mmcca {

namespace {

constexpr double kDirichletConcentration = 0.5;

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) throw Error(Errc::invalid_argument, std::string(name) + " must be positive");
}

void require_dims(Index value, const char* name) {
  if (value < 1) throw Error(Errc::invalid_argument, std::string(name) + " must be at least 1");
}

Matrix dirichlet_columns(Rng& rng, Index rows, Index cols) {
  Matrix D(rows, cols);
  for (Index k = 0; k < cols; ++k) D.col(k) = rng.dirichlet(rows, kDirichletConcentration);
  return D;
}

Matrix uniform_l1_columns(Rng& rng, Index rows, Index cols) {
  Matrix D(rows, cols);
  for (Index k = 0; k < cols; ++k) {
    for (Index m = 0; m < rows; ++m) D(m, k) = 2.0 * rng.uniform() - 1.0;
  }
  return normalize_columns_l1(D);
}

Matrix gamma_draws(Rng& rng, Index rows, Index N, double shape, double rate, bool symmetric) {
  Matrix out(rows, N);
  for (Index n = 0; n < N; ++n) {
    for (Index k = 0; k < rows; ++k) {
      const double g = rng.gamma(shape, rate);
      out(k, n) = symmetric ? rng.rademacher() * g : g;
    }
  }
  return out;
}

ViewMatrix poisson_view(Rng& rng, const Matrix& means) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index n = 0; n < means.cols(); ++n) {
    for (Index m = 0; m < means.rows(); ++m) {
      const std::uint64_t x = rng.poisson(means(m, n));
      if (x > 0) triplets.emplace_back(m, n, static_cast<double>(x));
    }
  }
  return ViewMatrix::from_triplets(means.rows(), means.cols(), triplets);
}

}  // namespace

Matrix normalize_columns_l1(const Matrix& D) {
  Matrix out = D;
  for (Index k = 0; k < out.cols(); ++k) {
    const double norm = out.col(k).lpNorm<1>();
    if (norm > 0.0) out.col(k) /= norm;
  }
  return out;
}

DiscreteInstance gen_discrete_instance(const DiscreteParams& p, std::uint64_t seed) {
  require_dims(p.M1, "M1");
  require_dims(p.M2, "M2");
  require_dims(p.K, "K");
  require_dims(p.K1, "K1");
  require_dims(p.K2, "K2");
  require_positive(p.c, "c");
  require_positive(p.c1, "c1");
  require_positive(p.c2, "c2");
  require_positive(p.Ls, "Ls");
  require_positive(p.Ln, "Ln");

  DiscreteInstance inst;
  inst.params = p;
  if (p.mode == LoadingMode::fixed2d) {
    if (p.M1 != 2 || p.M2 != 2 || p.K1 != 2 || p.K2 != 2 || p.K != 1) {
      throw Error(Errc::invalid_argument, "fixed2d requires M1 = M2 = K1 = K2 = 2 and K = 1");
    }
    inst.D1 = Matrix::Constant(2, 1, 0.5);
    inst.D2 = inst.D1;
    inst.F1.resize(2, 2);
    inst.F1 << 0.9, 0.1, 0.1, 0.9;
    inst.F2 = inst.F1;
  } else {
    Rng rng(seed);
    inst.D1 = dirichlet_columns(rng, p.M1, p.K);
    inst.D2 = dirichlet_columns(rng, p.M2, p.K);
    inst.F1 = dirichlet_columns(rng, p.M1, p.K1);
    inst.F2 = dirichlet_columns(rng, p.M2, p.K2);
  }
  inst.b = static_cast<double>(p.K) * p.c / p.Ls;
  inst.b1 = static_cast<double>(p.K1) * p.c1 / p.Ln;
  inst.b2 = static_cast<double>(p.K2) * p.c2 / p.Ln;
  return inst;
}

Sample sample_discrete(const DiscreteInstance& inst, Index N, std::uint64_t seed) {
  if (N < 1) throw Error(Errc::invalid_argument, "sample size must be at least 1");
  const DiscreteParams& p = inst.params;
  Rng rng(seed);
  Sample s;
  s.alpha = gamma_draws(rng, p.K, N, p.c, inst.b, false);
  s.beta1 = gamma_draws(rng, p.K1, N, p.c1, inst.b1, false);
  s.beta2 = gamma_draws(rng, p.K2, N, p.c2, inst.b2, false);
  s.X1 = poisson_view(rng, inst.D1 * s.alpha + inst.F1 * s.beta1);
  s.X2 = poisson_view(rng, inst.D2 * s.alpha + inst.F2 * s.beta2);
  return s;
}

ContinuousInstance gen_continuous_instance(const ContinuousParams& p, std::uint64_t seed) {
  require_dims(p.M1, "M1");
  require_dims(p.M2, "M2");
  require_dims(p.K, "K");
  require_dims(p.K1, "K1");
  require_dims(p.K2, "K2");
  require_positive(p.c, "c");
  require_positive(p.c1, "c1");
  require_positive(p.c2, "c2");
  require_positive(p.Ls, "Ls");
  require_positive(p.Ln, "Ln");
  Rng rng(seed);
  ContinuousInstance inst;
  inst.params = p;
  inst.D1 = uniform_l1_columns(rng, p.M1, p.K);
  inst.D2 = uniform_l1_columns(rng, p.M2, p.K);
  inst.F1 = uniform_l1_columns(rng, p.M1, p.K1);
  inst.F2 = uniform_l1_columns(rng, p.M2, p.K2);
  inst.b = static_cast<double>(p.K) * p.c / p.Ls;
  inst.b1 = static_cast<double>(p.K1) * p.c1 / p.Ln;
  inst.b2 = static_cast<double>(p.K2) * p.c2 / p.Ln;
  return inst;
}

Sample sample_continuous(const ContinuousInstance& inst, Index N, std::uint64_t seed) {
  if (N < 1) throw Error(Errc::invalid_argument, "sample size must be at least 1");
  const ContinuousParams& p = inst.params;
  Rng rng(seed);
  Sample s;
  s.alpha = gamma_draws(rng, p.K, N, p.c, inst.b, true);
  s.beta1 = gamma_draws(rng, p.K1, N, p.c1, inst.b1, true);
  s.beta2 = gamma_draws(rng, p.K2, N, p.c2, inst.b2, true);
  s.X1 = ViewMatrix::dense(inst.D1 * s.alpha + inst.F1 * s.beta1);
  s.X2 = ViewMatrix::dense(inst.D2 * s.alpha + inst.F2 * s.beta2);
  return s;
}

}  // namespace mmcca
