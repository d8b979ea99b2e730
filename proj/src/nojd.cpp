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
#include "mmcca/nojd.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>

#include "mmcca/error.hpp"

namespace mmcca {

TargetSet::TargetSet(std::vector<Matrix> matrices) {
  for (auto& m : matrices) add(std::move(m));
}

void TargetSet::add(Matrix m, std::string label) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(Errc::dimension, "target matrices must be square and nonempty");
  }
  if (!matrices_.empty() && m.rows() != dim()) {
    throw Error(Errc::dimension, "target matrices must share one size");
  }
  if (!m.allFinite()) throw Error(Errc::invalid_argument, "target matrix has non-finite entries");
  matrices_.push_back(std::move(m));
  labels_.push_back(std::move(label));
}

TargetSet TargetSet::similarity(const Matrix& V) const {
  Eigen::PartialPivLU<Matrix> lu(V);
  TargetSet out;
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    out.matrices_.push_back(lu.solve(matrices_[i] * V));
    out.labels_.push_back(labels_[i]);
  }
  return out;
}

double off_measure(const TargetSet& S) {
  double total = 0.0;
  for (const Matrix& A : S.matrices()) {
    for (Index j = 0; j < A.cols(); ++j) {
      for (Index i = 0; i < A.rows(); ++i) {
        if (i != j) total += A(i, j) * A(i, j);
      }
    }
  }
  return total;
}

double normality_measure(const TargetSet& S) {
  double total = 0.0;
  for (const Matrix& A : S.matrices()) total += A.squaredNorm();
  return total;
}

double optimal_givens_angle(const TargetSet& S, Index p, Index q) {
  double g11 = 0.0, g12 = 0.0, g22 = 0.0;
  for (const Matrix& A : S.matrices()) {
    const double h1 = A(p, p) - A(q, q);
    const double h2 = A(p, q) + A(q, p);
    g11 += h1 * h1;
    g12 += h1 * h2;
    g22 += h2 * h2;
  }
  if (g12 == 0.0 && g11 >= g22) return 0.0;
  // Dominant eigenvector (cos phi, sin phi) of G with cos phi >= 0; the
  // rotated diagonal gap is h^T (cos 2theta, -sin 2theta).
  const double phi = 0.5 * std::atan2(2.0 * g12, g11 - g22);
  return -0.5 * phi;
}

double jdtm_surrogate(const TargetSet& S, Index p, Index q, double y) {
  const double c = std::cosh(y);
  const double s = std::sinh(y);
  double total = 0.0;
  for (const Matrix& A : S.matrices()) {
    const double a = A(p, p), b = A(p, q), g = A(q, p), d = A(q, q);
    const double apq = b * c * c - g * s * s + (a - d) * c * s;
    const double aqp = g * c * c - b * s * s + (d - a) * c * s;
    total += apq * apq + aqp * aqp;
  }
  return total;
}

double optimal_shear(const TargetSet& S, Index p, Index q, double y_max) {
  // With u = (b+g)/2, w = (a-d)/2, z = (b-g)/2 the transformed entries are
  // u +- (z cosh 2y + w sinh 2y), so
  //   surrogate / 2 = sum u^2 + (A - C)/2 + (A + C)/2 cosh 4y + B sinh 4y
  // with A = sum z^2, B = sum z w, C = sum w^2: convex in y, minimized at
  // tanh 4y = -2B / (A + C).
  double zw = 0.0, scale = 0.0;
  for (const Matrix& A : S.matrices()) {
    const double w = 0.5 * (A(p, p) - A(q, q));
    const double z = 0.5 * (A(p, q) - A(q, p));
    zw += z * w;
    scale += z * z + w * w;
  }
  if (!(scale > 0.0) || zw == 0.0) return 0.0;
  const double r = -2.0 * zw / scale;
  double y = std::abs(r) < 1.0 ? 0.25 * std::atanh(r) : std::copysign(y_max, r);
  y = std::clamp(y, -y_max, y_max);
  if (!std::isfinite(y)) return 0.0;
  if (jdtm_surrogate(S, p, q, y) > jdtm_surrogate(S, p, q, 0.0)) return 0.0;
  return y;
}

void apply_shear(TargetSet& S, Index p, Index q, double y) {
  if (y == 0.0) return;
  const double c = std::cosh(y);
  const double s = std::sinh(y);
  for (Index i = 0; i < S.size(); ++i) {
    Matrix& A = S[i];
    // columns: A S
    for (Index r = 0; r < A.rows(); ++r) {
      const double ap = A(r, p), aq = A(r, q);
      A(r, p) = c * ap + s * aq;
      A(r, q) = s * ap + c * aq;
    }
    // rows: S^{-1} A with S^{-1} = [[c, -s], [-s, c]]
    for (Index col = 0; col < A.cols(); ++col) {
      const double ap = A(p, col), aq = A(q, col);
      A(p, col) = c * ap - s * aq;
      A(q, col) = -s * ap + c * aq;
    }
  }
}

void apply_rotation(TargetSet& S, Index p, Index q, double theta) {
  if (theta == 0.0) return;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (Index i = 0; i < S.size(); ++i) {
    Matrix& A = S[i];
    // columns: A U with U = [[c, s], [-s, c]]
    for (Index r = 0; r < A.rows(); ++r) {
      const double ap = A(r, p), aq = A(r, q);
      A(r, p) = c * ap - s * aq;
      A(r, q) = s * ap + c * aq;
    }
    // rows: U^T A
    for (Index col = 0; col < A.cols(); ++col) {
      const double ap = A(p, col), aq = A(q, col);
      A(p, col) = c * ap - s * aq;
      A(q, col) = s * ap + c * aq;
    }
  }
}

namespace {

constexpr double kRoundingFloor = 1e-28;

void right_shear(Matrix& Q, Index p, Index q, double y) {
  if (y == 0.0) return;
  const double c = std::cosh(y);
  const double s = std::sinh(y);
  for (Index r = 0; r < Q.rows(); ++r) {
    const double qp = Q(r, p), qq = Q(r, q);
    Q(r, p) = c * qp + s * qq;
    Q(r, q) = s * qp + c * qq;
  }
}

void right_rotation(Matrix& Q, Index p, Index q, double theta) {
  if (theta == 0.0) return;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (Index r = 0; r < Q.rows(); ++r) {
    const double qp = Q(r, p), qq = Q(r, q);
    Q(r, p) = c * qp - s * qq;
    Q(r, q) = s * qp + c * qq;
  }
}

}  // namespace

Diagonalizer nojd_jdtm(const TargetSet& input, const NojdOptions& options) {
  if (input.empty()) throw Error(Errc::insufficient_targets, "no target matrices to diagonalize");
  const Index K = input.dim();
  TargetSet work = input;
  Matrix Q = Matrix::Identity(K, K);

  Diagonalizer result;
  double off = off_measure(work);
  result.trace.push_back({0, off, normality_measure(work)});
  Matrix best_Q = Q;
  double best_off = off;
  double best_normality = result.trace.back().normality;

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    for (Index p = 0; p + 1 < K; ++p) {
      for (Index q = p + 1; q < K; ++q) {
        const double y = optimal_shear(work, p, q, options.y_max);
        apply_shear(work, p, q, y);
        const double theta = optimal_givens_angle(work, p, q);
        apply_rotation(work, p, q, theta);
        right_shear(Q, p, q, y);
        right_rotation(Q, p, q, theta);
      }
    }
    const double previous = off;
    off = off_measure(work);
    const double normality = normality_measure(work);
    result.trace.push_back({sweep, off, normality});
    result.sweeps_used = sweep;

    const double cond = condition_number(Q);
    if (!(cond <= options.max_condition)) {
      throw Error(Errc::ill_conditioned, "diagonalizer condition number " + std::to_string(cond) +
                                             " exceeds " + std::to_string(options.max_condition) +
                                             " after sweep " + std::to_string(sweep));
    }
    if (off > previous) result.off_increased = true;
    if (off <= best_off) {
      best_off = off;
      best_Q = Q;
      best_normality = normality;
    }
    // Off at the rounding floor counts as exact diagonalization.
    if (off <= kRoundingFloor * normality || previous == 0.0) {
      result.converged = true;
      break;
    }
    const double decrease = (previous - off) / previous;
    if (decrease >= 0.0 && decrease < options.tol) {
      result.converged = true;
      break;
    }
  }

  result.Q = std::move(best_Q);
  result.final_off = best_off;
  result.final_normality = best_normality;
  result.condition = condition_number(result.Q);
  return result;
}

Diagonalizer spectral_diagonalizer(const Matrix& B) {
  const Eigensystem es = eig_nonsymmetric(B);
  Diagonalizer result;
  // Real parts for real eigenvalues. A conjugate pair (v, conj v) has equal
  // real parts; (Re v, Im v) spans the same real invariant plane instead.
  const Index K = B.rows();
  result.Q.resize(K, K);
  for (Index i = 0; i < K; ++i) {
    const bool paired = es.values[i].imag() != 0.0 && i + 1 < K && es.values[i + 1] == std::conj(es.values[i]);
    result.Q.col(i) = es.vectors.col(i).real();
    if (paired) {
      result.Q.col(i + 1) = es.vectors.col(i).imag();
      ++i;
    }
  }
  const double real_mass = es.vectors.real().norm();
  const double imag_mass = es.vectors.imag().norm();
  result.imaginary_ratio = real_mass > 0.0 ? imag_mass / real_mass : 0.0;
  result.sweeps_used = 0;
  result.converged = true;
  result.condition = condition_number(result.Q);

  TargetSet single;
  single.add(B, "spectral");
  result.trace.push_back({0, off_measure(single), normality_measure(single)});
  if (std::isfinite(result.condition)) {
    const TargetSet diag = single.similarity(result.Q);
    result.final_off = off_measure(diag);
    result.final_normality = normality_measure(diag);
  } else {
    result.final_off = std::numeric_limits<double>::infinity();
  }
  return result;
}

std::string trace_csv(const Diagonalizer& d) {
  std::ostringstream out;
  out.precision(17);
  out << "sweep,off,normality\n";
  for (const SweepRecord& r : d.trace) out << r.sweep << ',' << r.off << ',' << r.normality << '\n';
  return out.str();
}

}  // namespace mmcca
