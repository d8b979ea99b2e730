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
#include <set>

#include "mmcca/random.hpp"

using namespace mmcca;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <typename F>
Moments sample_moments(int n, F&& draw) {
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n;
  return {mean, (s2 - n * mean * mean) / (n - 1)};
}

// |observed - expected| within z standard errors of the mean estimate.
bool within_se(double observed, double expected, double variance, int n, double z = 4.0) {
  return std::abs(observed - expected) <= z * std::sqrt(variance / n);
}

}  // namespace

TEST_CASE("equal seeds give equal streams, distinct seeds differ") {
  Rng a(5), b(5), c(6);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    differ = differ || x != c.uniform();
  }
  CHECK(differ);
}

TEST_CASE("uniform draws stay in range with the right moments") {
  Rng rng(1);
  const int n = 200000;
  bool in_range = true;
  const Moments m = sample_moments(n, [&] {
    const double u = rng.uniform();
    in_range = in_range && u >= 0.0 && u < 1.0;
    return u;
  });
  CHECK(in_range);
  CHECK(within_se(m.mean, 0.5, 1.0 / 12.0, n));
  CHECK(std::abs(m.var - 1.0 / 12.0) < 2e-3);
  bool open = true;
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform_open();
    open = open && u > 0.0 && u < 1.0;
  }
  CHECK(open);
}

TEST_CASE("normal and Rademacher moments") {
  Rng rng(2);
  const int n = 200000;
  const Moments z = sample_moments(n, [&] { return rng.normal(); });
  CHECK(within_se(z.mean, 0.0, 1.0, n));
  CHECK(std::abs(z.var - 1.0) < 0.02);
  bool signs = true;
  const Moments r = sample_moments(n, [&] {
    const double s = rng.rademacher();
    signs = signs && (s == 1.0 || s == -1.0);
    return s;
  });
  CHECK(signs);
  CHECK(within_se(r.mean, 0.0, 1.0, n));
}

TEST_CASE("gamma mean and variance for shapes below and above one") {
  Rng rng(3);
  const int n = 200000;
  for (double shape : {0.1, 0.3, 1.0, 2.5, 12.0}) {
    for (double rate : {0.001, 1.0, 4.0}) {
      bool nonnegative = true;
      const Moments m = sample_moments(n, [&] {
        const double g = rng.gamma(shape, rate);
        nonnegative = nonnegative && g >= 0.0;
        return g;
      });
      CHECK(nonnegative);
      const double mean = shape / rate, var = shape / (rate * rate);
      CHECK_MESSAGE(within_se(m.mean, mean, var, n), "shape " << shape << " rate " << rate);
      // Variance of the sample variance uses the fourth cumulant 6 shape / rate^4.
      const double var_of_var = (6.0 * shape / std::pow(rate, 4) + 2.0 * var * var) / n;
      CHECK(std::abs(m.var - var) <= 5.0 * std::sqrt(var_of_var));
    }
  }
}

TEST_CASE("poisson on both sides of the inversion threshold") {
  Rng rng(4);
  const int n = 200000;
  for (double mean : {0.0, 0.05, 1.0, 7.5, 9.99, 10.0, 30.0, 500.0}) {
    const Moments m = sample_moments(n, [&] { return static_cast<double>(rng.poisson(mean)); });
    if (mean == 0.0) {
      CHECK(m.mean == 0.0);
      continue;
    }
    CHECK_MESSAGE(within_se(m.mean, mean, mean, n), "mean " << mean);
    CHECK_MESSAGE(std::abs(m.var / mean - 1.0) < 0.03, "mean " << mean);
  }
}

TEST_CASE("poisson small-mean probabilities") {
  Rng rng(7);
  const int n = 200000;
  const double lambda = 2.0;
  int counts[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const auto k = rng.poisson(lambda);
    if (k < 4) ++counts[k];
  }
  double p = std::exp(-lambda);
  for (int k = 0; k < 4; ++k) {
    const double observed = static_cast<double>(counts[k]) / n;
    CHECK(std::abs(observed - p) <= 4.0 * std::sqrt(p * (1 - p) / n));
    p *= lambda / (k + 1);
  }
}

TEST_CASE("dirichlet draws lie on the simplex with mean 1/k") {
  Rng rng(8);
  const int n = 50000;
  const Index k = 5;
  Vector total = Vector::Zero(k);
  bool simplex = true;
  for (int i = 0; i < n; ++i) {
    const Vector d = rng.dirichlet(k, 0.5);
    simplex = simplex && (d.array() >= 0.0).all() && std::abs(d.sum() - 1.0) < 1e-12;
    total += d;
  }
  // Var of a symmetric Dirichlet coordinate: (k-1) / (k^2 (k a + 1)).
  CHECK(simplex);
  const double var = (k - 1.0) / (k * k * (k * 0.5 + 1.0));
  for (Index i = 0; i < k; ++i) CHECK(within_se(total(i) / n, 1.0 / k, var, n));
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 4; ++a)
    for (std::uint64_t b = 0; b < 8; ++b)
      for (std::uint64_t c = 0; c < 8; ++c) seen.insert(derive_seed(42, a, b, c));
  CHECK(seen.size() == 4 * 8 * 8);
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3, 0));
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}
