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

#include <cstdint>
#include <random>

#include "mmcca/linalg.hpp"

namespace mmcca {

/// Seeded generator with platform-independent samplers. Only the raw 64-bit
/// engine comes from the standard library; every distribution is implemented
/// here so that streams are bit-reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  double normal();
  /// +1 or -1 with equal probability.
  double rademacher();
  /// Gamma with shape and rate (mean shape / rate). Marsaglia-Tsang squeeze,
  /// with the U^(1/shape) boost for shape < 1.
  double gamma(double shape, double rate);
  /// Inversion for mean < 10, transformed rejection (PTRS) above.
  std::uint64_t poisson(double mean);
  /// Symmetric Dirichlet via normalized gamma draws.
  Vector dirichlet(Index k, double concentration);
  Matrix normal_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with stream identifiers (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace mmcca
