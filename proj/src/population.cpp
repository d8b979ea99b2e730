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
#include <cmath>
#include <string>

#include "mmcca/error.hpp"
#include "mmcca/synthetic.hpp"

namespace mmcca {

namespace {

void require_same_k(const SourceModel& s, Index K) {
  if (s.shape.size() != K || (s.law != SourceLaw::gaussian && s.rate.size() != K)) {
    throw Error(Errc::dimension, "source model has " + std::to_string(s.shape.size()) + " sources, loadings have " +
                                     std::to_string(K));
  }
}

// Second derivative of log M(h) for M(h) = E exp(h alpha).
double gamma_hessian(double c, double b, double h) {
  if (!(h < b)) throw Error(Errc::invalid_argument, "gamma cumulant generating function undefined at h >= rate");
  return c / ((b - h) * (b - h));
}

double symmetric_gamma_hessian(double c, double b, double h) {
  const double r = h / b;
  if (!(std::abs(r) < 1.0)) {
    throw Error(Errc::invalid_argument, "symmetric gamma cumulant generating function undefined at |h| >= rate");
  }
  const double lo = 1.0 - r, hi = 1.0 + r;
  const double m0 = 0.5 * (std::pow(lo, -c) + std::pow(hi, -c));
  const double m1 = 0.5 * (c / b) * (std::pow(lo, -c - 1.0) - std::pow(hi, -c - 1.0));
  const double m2 = 0.5 * (c * (c + 1.0) / (b * b)) * (std::pow(lo, -c - 2.0) + std::pow(hi, -c - 2.0));
  const double g = m1 / m0;
  return m2 / m0 - g * g;
}

}  // namespace

Vector SourceModel::variance() const { return generalized_variance(Vector::Zero(k())); }

Vector SourceModel::third_cumulant() const {
  Vector out = Vector::Zero(k());
  if (law == SourceLaw::gamma) {
    for (Index i = 0; i < k(); ++i) out[i] = 2.0 * shape[i] / (rate[i] * rate[i] * rate[i]);
  }
  return out;
}

Vector SourceModel::generalized_variance(const Vector& h) const {
  if (h.size() != k()) throw Error(Errc::dimension, "h has the wrong length for the source model");
  Vector out(k());
  for (Index i = 0; i < k(); ++i) {
    switch (law) {
      case SourceLaw::gamma:
        out[i] = gamma_hessian(shape[i], rate[i], h[i]);
        break;
      case SourceLaw::symmetric_gamma:
        out[i] = symmetric_gamma_hessian(shape[i], rate[i], h[i]);
        break;
      case SourceLaw::gaussian:
        out[i] = shape[i];
        break;
    }
  }
  return out;
}

Matrix population_cross_covariance(const Matrix& D1, const Matrix& D2, const SourceModel& sources) {
  if (D1.cols() != D2.cols()) throw Error(Errc::dimension, "loadings must share K");
  require_same_k(sources, D1.cols());
  return D1 * sources.variance().asDiagonal() * D2.transpose();
}

Vector population_h(ModelKind model, const Matrix& D1, const Matrix& D2, const ProcessingPoint& t) {
  if (t.t1.size() != D1.rows() || t.t2.size() != D2.rows()) {
    throw Error(Errc::dimension, "processing point does not match the loading dimensions");
  }
  const auto poisson_arg = [](const Vector& v) -> Vector { return v.array().exp() - 1.0; };
  const Vector a1 = model == ModelKind::dcca ? poisson_arg(t.t1) : t.t1;
  const Vector a2 = model == ModelKind::ncca ? t.t2 : poisson_arg(t.t2);
  return D1.transpose() * a1 + D2.transpose() * a2;
}

Matrix population_gen_cross_covariance(ModelKind model, const Matrix& D1, const Matrix& D2,
                                       const SourceModel& sources, const ProcessingPoint& t) {
  if (D1.cols() != D2.cols()) throw Error(Errc::dimension, "loadings must share K");
  require_same_k(sources, D1.cols());
  const Vector C = sources.generalized_variance(population_h(model, D1, D2, t));
  return D1 * C.asDiagonal() * D2.transpose();
}

}  // namespace mmcca
