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

#include <string>
#include <vector>

#include "mmcca/linalg.hpp"

namespace mmcca {

/// Ordered K x K matrices that share (approximately) one diagonalizer by
/// similarity, with a provenance label per matrix.
class TargetSet {
 public:
  TargetSet() = default;
  explicit TargetSet(std::vector<Matrix> matrices);

  void add(Matrix m, std::string label = {});
  Index size() const { return static_cast<Index>(matrices_.size()); }
  Index dim() const { return matrices_.empty() ? 0 : matrices_.front().rows(); }
  bool empty() const { return matrices_.empty(); }

  const Matrix& operator[](Index i) const { return matrices_[static_cast<std::size_t>(i)]; }
  Matrix& operator[](Index i) { return matrices_[static_cast<std::size_t>(i)]; }
  const std::vector<Matrix>& matrices() const { return matrices_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// A_p <- V^{-1} A_p V for every matrix.
  TargetSet similarity(const Matrix& V) const;

 private:
  std::vector<Matrix> matrices_;
  std::vector<std::string> labels_;
};

struct SweepRecord {
  int sweep = 0;
  double off = 0.0;
  double normality = 0.0;
};

struct Diagonalizer {
  /// Columns approximate the common eigenvectors: Q^{-1} A_p Q ~ diagonal.
  Matrix Q;
  int sweeps_used = 0;
  double final_off = 0.0;
  double final_normality = 0.0;
  double condition = 1.0;
  /// Stopped by the relative-decrease test (or reached Off = 0).
  bool converged = false;
  /// Some sweep increased Off; Q is the best iterate seen.
  bool off_increased = false;
  /// Imaginary-to-real mass of the eigenvectors (spectral route only).
  double imaginary_ratio = 0.0;
  /// Entry 0 is the input set, then one record per sweep.
  std::vector<SweepRecord> trace;
};

/// Sum over matrices of squared off-diagonal entries.
double off_measure(const TargetSet& S);
/// Sum over matrices of squared Frobenius norms.
double normality_measure(const TargetSet& S);

/// Rotation angle in [-pi/4, pi/4] minimizing Off of U^T A U over the (p, q)
/// plane, via the dominant eigenvector of the 2x2 Gram matrix of
/// [a_pp - a_qq, a_pq + a_qp].
double optimal_givens_angle(const TargetSet& S, Index p, Index q);

/// Sum over matrices of a'_pq^2 + a'_qp^2 after A' = S(y)^{-1} A S(y).
double jdtm_surrogate(const TargetSet& S, Index p, Index q, double y);

/// Minimizer of jdtm_surrogate, clamped to |y| <= y_max. The surrogate is
/// convex in y with a closed-form minimizer, so the clamped value never
/// increases it relative to y = 0.
double optimal_shear(const TargetSet& S, Index p, Index q, double y_max = 0.5);

/// A <- S^{-1} A S on the (p, q) plane.
void apply_shear(TargetSet& S, Index p, Index q, double y);
/// A <- U^T A U on the (p, q) plane.
void apply_rotation(TargetSet& S, Index p, Index q, double theta);

struct NojdOptions {
  int max_sweeps = 100;
  double tol = 1e-10;
  double y_max = 0.5;
  double max_condition = 1e8;
};

/// Jacobi-like joint diagonalization by similarity: per lexicographic pivot,
/// a JDTM shear then an optimal Givens rotation,
/// Q <- Q S U and A <- U^T S^{-1} A S U.
Diagonalizer nojd_jdtm(const TargetSet& S, const NojdOptions& options = {});

/// Q from the eigenvectors of a single target: real parts for real
/// eigenvalues, (Re v, Im v) for each complex-conjugate pair.
Diagonalizer spectral_diagonalizer(const Matrix& B);

/// Per-sweep Off / normality rows, header "sweep,off,normality".
std::string trace_csv(const Diagonalizer& d);

}  // namespace mmcca
