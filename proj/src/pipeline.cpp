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
#include "mmcca/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmcca/error.hpp"
#include "mmcca/random.hpp"

namespace mmcca {

namespace {

constexpr double kSingularCondition = 1e12;
constexpr double kIdentifiabilityTol = 1e-6;
constexpr double kImaginaryWarning = 0.01;

bool is_zero_point(const ProcessingPoint& t) {
  return (t.t1.size() == 0 || t.t1.isZero(0.0)) && (t.t2.size() == 0 || t.t2.isZero(0.0));
}

bool view_is_counts(ModelKind model, int view) {
  if (model == ModelKind::dcca) return true;
  if (model == ModelKind::mcca) return view == 2;
  return false;
}

// Deflation factors diag(e^{-t_j}) for count views; empty means none.
Vector deflation(ModelKind model, int view, const Vector& t) {
  if (!view_is_counts(model, view)) return {};
  return (-t.array()).exp();
}

Vector random_unit(Rng& rng, Index K) {
  Vector u(K);
  do {
    for (Index i = 0; i < K; ++i) u[i] = rng.normal();
  } while (u.norm() == 0.0);
  return u / u.norm();
}

ProcessingPoint direction_point(const WhiteningPair& W, const Vector& u, double delta1, double delta2) {
  return {delta1 * W.W1.transpose() * u, delta2 * W.W2.transpose() * u};
}

template <typename F>
auto staged(const char* stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw e.with_stage(stage);
  }
}

double identifiability_gap(const TargetSet& targets, const Matrix& Q) {
  const Index K = Q.cols();
  if (K < 2) return std::numeric_limits<double>::infinity();
  Eigen::PartialPivLU<Matrix> lu(Q);
  Matrix profiles(targets.size(), K);
  for (Index p = 0; p < targets.size(); ++p) profiles.row(p) = lu.solve(targets[p] * Q).diagonal().transpose();
  double scale = 0.0;
  for (Index k = 0; k < K; ++k) scale = std::max(scale, profiles.col(k).norm());
  if (!(scale > 0.0)) return 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < K; ++a) {
    for (Index b = a + 1; b < K; ++b) gap = std::min(gap, (profiles.col(a) - profiles.col(b)).norm() / scale);
  }
  return gap;
}

void post_process(Matrix& D, bool counts) {
  for (Index k = 0; k < D.cols(); ++k) {
    if (counts) {
      const double pos = D.col(k).cwiseMax(0.0).squaredNorm();
      const double neg = D.col(k).cwiseMin(0.0).squaredNorm();
      if (neg > pos) D.col(k) = -D.col(k);
      D.col(k) = D.col(k).cwiseMax(0.0);
    }
    const double norm = D.col(k).lpNorm<1>();
    if (norm > 0.0) D.col(k) /= norm;
  }
}

std::vector<ProcessingPoint> assemble_points(const WhiteningPair& W, const FitConfig& config, double delta1,
                                             double delta2) {
  std::vector<ProcessingPoint> points = build_processing_points(W, delta1, delta2);
  const Index wanted = config.num_points == 0 ? static_cast<Index>(points.size()) : config.num_points;
  if (wanted < static_cast<Index>(points.size())) {
    points.resize(static_cast<std::size_t>(wanted));
  } else if (wanted > static_cast<Index>(points.size())) {
    Rng rng(derive_seed(config.seed, 3));
    while (static_cast<Index>(points.size()) < wanted) {
      points.push_back(direction_point(W, random_unit(rng, W.k()), delta1, delta2));
    }
  }
  for (const ProcessingPoint& t : config.extra_points) points.push_back(t);
  return points;
}

WhiteningOptions whitening_options(const FitConfig& config) {
  WhiteningOptions opts;
  opts.method = config.whitening;
  opts.oversample = config.oversample;
  opts.seed = derive_seed(config.seed, 1);
  return opts;
}

}  // namespace

void validate(const FitConfig& c) {
  if (c.K < 1) throw Error(Errc::invalid_argument, "K must be at least 1");
  if (!(c.delta > 0.0) || !std::isfinite(c.delta)) throw Error(Errc::invalid_argument, "delta must be positive");
  if (c.num_points != 0 && c.num_points < 2) throw Error(Errc::invalid_argument, "num_points must be at least 2");
  if (c.max_sweeps < 1) throw Error(Errc::invalid_argument, "max_sweeps must be at least 1");
  if (!(c.tol >= 0.0)) throw Error(Errc::invalid_argument, "tol must be nonnegative");
  if (c.oversample < 0) throw Error(Errc::invalid_argument, "oversample must be nonnegative");
}

double processing_scale(const ViewMatrix& X, double delta) {
  if (!(delta > 0.0)) throw Error(Errc::invalid_argument, "delta must be positive");
  const double total = X.abs_sum();
  if (!(total > 0.0)) throw Error(Errc::scale, "view has only zero entries; processing-point scale undefined");
  return delta * static_cast<double>(X.samples()) * static_cast<double>(X.variables()) / total;
}

std::vector<ProcessingPoint> build_processing_points(const WhiteningPair& W, double delta1, double delta2) {
  const Index K = W.k();
  const Index M1 = W.W1.cols(), M2 = W.W2.cols();
  std::vector<ProcessingPoint> points;
  points.push_back({Vector::Zero(M1), Vector::Zero(M2)});
  for (Index p = 0; p < K; ++p) points.push_back({delta1 * W.W1.row(p).transpose(), Vector::Zero(M2)});
  for (Index p = 0; p < K; ++p) points.push_back({Vector::Zero(M1), delta2 * W.W2.row(p).transpose()});
  return points;
}

std::vector<ProcessingPoint> build_processing_points(const WhiteningPair& W, const ViewMatrix& X1,
                                                     const ViewMatrix& X2, double delta) {
  return build_processing_points(W, processing_scale(X1, delta), processing_scale(X2, delta));
}

TargetSet build_targets_gencov(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W,
                               const std::vector<ProcessingPoint>& points, ModelKind model,
                               std::vector<DroppedPoint>* dropped) {
  TargetSet targets;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const ProcessingPoint& t = points[i];
    if (is_zero_point(t)) {
      CrossCovarianceOperator S(X1, X2);
      targets.add(W.W1 * S.apply(W.W2.transpose()), "t0");
      continue;
    }
    try {
      targets.add(whitened_gen_cross_covariance(X1, X2, W, t, deflation(model, 1, t.t1), deflation(model, 2, t.t2)),
                  "t" + std::to_string(i));
    } catch (const Error& e) {
      if (e.code() != Errc::degenerate_weights) throw;
      if (dropped) dropped->push_back({static_cast<Index>(i), e.what()});
    }
  }
  if (targets.size() < 2) {
    throw Error(Errc::insufficient_targets, "only " + std::to_string(targets.size()) +
                                                " target matrices survived; at least 2 are required");
  }
  return targets;
}

TargetSet build_targets_cumulant(const ViewMatrix& X1, const ViewMatrix& X2, const WhiteningPair& W) {
  TargetSet targets;
  CrossCovarianceOperator S(X1, X2);
  targets.add(W.W1 * S.apply(W.W2.transpose()), "s12");
  const Index K = W.k();
  for (int view = 1; view <= 2; ++view) {
    for (Index p = 0; p < K; ++p) {
      targets.add(whitened_t_projection(X1, X2, W, Vector::Unit(K, p), view),
                  "t" + std::to_string(view) + "_" + std::to_string(p));
    }
  }
  return targets;
}

Loadings recover_loadings(const WhiteningPair& W, const Matrix& Q, ModelKind model) {
  if (Q.rows() != W.k() || Q.cols() != W.k()) throw Error(Errc::dimension, "diagonalizer does not match K");
  const double cond = condition_number(Q);
  if (!std::isfinite(cond) || cond > kSingularCondition) {
    std::ostringstream msg;
    msg << "diagonalizer is singular to tolerance (condition number " << cond << ")";
    throw Error(Errc::singular, msg.str());
  }
  Loadings L;
  L.D1 = pseudo_inverse(W.W1) * Q;
  L.D2 = pseudo_inverse(W.W2) * Q.inverse().transpose();
  post_process(L.D1, view_is_counts(model, 1));
  post_process(L.D2, view_is_counts(model, 2));
  return L;
}

FitResult fit_targets(const WhiteningPair& W, const TargetSet& targets, const FitConfig& config) {
  FitResult result;
  result.whitening = W;
  FitDiagnostics& diag = result.diagnostics;
  diag.num_targets = targets.size();
  if (W.singular_values.size() > 0) diag.whitening_condition = W.singular_values[0] / W.singular_values[W.k() - 1];

  Diagonalizer Q = staged("diagonalization", [&] {
    if (config.method == Method::spectral) {
      if (targets.size() != 1) throw Error(Errc::invalid_argument, "spectral diagonalization takes one target");
      return spectral_diagonalizer(targets[0]);
    }
    NojdOptions opts;
    opts.max_sweeps = config.max_sweeps;
    opts.tol = config.tol;
    return nojd_jdtm(targets, opts);
  });

  diag.trace = Q.trace;
  diag.sweeps = Q.sweeps_used;
  diag.final_off = Q.final_off;
  diag.converged = Q.converged;
  diag.off_increased = Q.off_increased;
  diag.diagonalizer_condition = Q.condition;
  diag.imaginary_ratio = Q.imaginary_ratio;
  if (Q.imaginary_ratio > kImaginaryWarning) {
    std::ostringstream msg;
    msg << "spectral eigenvectors have imaginary mass " << Q.imaginary_ratio << " of the real mass; kept real parts";
    diag.warnings.push_back(msg.str());
  }
  if (!Q.converged) diag.warnings.push_back("joint diagonalization stopped at max_sweeps; returning best iterate");
  if (Q.off_increased) diag.warnings.push_back("some sweep increased Off; returning best iterate");

  result.loadings = staged("recovery", [&] { return recover_loadings(W, Q.Q, config.model); });
  diag.identifiability_gap = identifiability_gap(targets, Q.Q);
  if (diag.identifiability_gap < kIdentifiabilityTol) {
    diag.warnings.push_back("target eigenvalue profiles do not separate the columns; loadings are not identifiable");
  }
  diag.flagged = diag.identifiability_gap < kIdentifiabilityTol || !Q.converged || Q.off_increased;
  result.Q = std::move(Q.Q);
  return result;
}

FitResult fit(const ViewMatrix& X1, const ViewMatrix& X2, const FitConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  staged("validation", [&] {
    validate(config);
    if (X1.samples() != X2.samples()) {
      throw Error(Errc::dimension, "views have different sample counts (" + std::to_string(X1.samples()) + " vs " +
                                       std::to_string(X2.samples()) + ")");
    }
    if (config.method == Method::cumulant) {
      if (config.model != ModelKind::dcca) {
        throw Error(Errc::invalid_argument, "the cumulant method is defined for the discrete model only");
      }
      if (!X1.is_count_data() || !X2.is_count_data()) {
        throw Error(Errc::invalid_argument, "the cumulant method requires count data in both views");
      }
    }
    if (config.model == ModelKind::dcca && (!X1.is_count_data() || !X2.is_count_data())) {
      throw Error(Errc::invalid_argument, "the discrete model requires count data in both views");
    }
    if (config.model == ModelKind::mcca && !X2.is_count_data()) {
      throw Error(Errc::invalid_argument, "the mixed model requires count data in view 2");
    }
  });

  // Scales first: an all-zero view is reported as such, not as a rank failure.
  double delta1 = 0.0, delta2 = 0.0;
  if (config.method != Method::cumulant) {
    staged("processing points", [&] {
      delta1 = processing_scale(X1, config.delta);
      delta2 = processing_scale(X2, config.delta);
    });
  }

  CrossCovarianceOperator S(X1, X2);
  const WhiteningPair W = staged("whitening", [&] { return compute_whitening(S, config.K, whitening_options(config)); });

  std::vector<DroppedPoint> dropped;
  const TargetSet targets = staged("targets", [&] {
    if (config.method == Method::cumulant) return build_targets_cumulant(X1, X2, W);
    if (config.method == Method::spectral) {
      Rng rng(derive_seed(config.seed, 2));
      const ProcessingPoint t = direction_point(W, random_unit(rng, config.K), delta1, delta2);
      TargetSet single;
      single.add(whitened_gen_cross_covariance(X1, X2, W, t, deflation(config.model, 1, t.t1),
                                               deflation(config.model, 2, t.t2)),
                 "spectral");
      return single;
    }
    return build_targets_gencov(X1, X2, W, assemble_points(W, config, delta1, delta2), config.model, &dropped);
  });

  FitResult result = fit_targets(W, targets, config);
  result.diagnostics.whitening_residual = whitening_residual(S, W);
  result.diagnostics.dropped = std::move(dropped);
  for (const DroppedPoint& d : result.diagnostics.dropped) {
    result.diagnostics.warnings.push_back("dropped processing point " + std::to_string(d.index) + ": " + d.reason);
  }
  result.diagnostics.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

TargetSet population_targets_gencov(const Matrix& D1, const Matrix& D2, const SourceModel& sources,
                                    const WhiteningPair& W, const std::vector<ProcessingPoint>& points,
                                    ModelKind model) {
  TargetSet targets;
  for (std::size_t i = 0; i < points.size(); ++i) {
    targets.add(W.W1 * population_gen_cross_covariance(model, D1, D2, sources, points[i]) * W.W2.transpose(),
                "t" + std::to_string(i));
  }
  return targets;
}

TargetSet population_targets_cumulant(const Matrix& D1, const Matrix& D2, const SourceModel& sources,
                                      const WhiteningPair& W) {
  TargetSet targets;
  const Matrix V1 = W.W1 * D1;
  const Matrix V2 = W.W2 * D2;
  targets.add(V1 * sources.variance().asDiagonal() * V2.transpose(), "s12");
  const Vector kappa = sources.third_cumulant();
  const Index K = W.k();
  for (int view = 1; view <= 2; ++view) {
    const Matrix& Vj = view == 1 ? V1 : V2;
    for (Index p = 0; p < K; ++p) {
      // D_j^T W_j^T e_p is row p of W_j D_j.
      const Vector weights = kappa.cwiseProduct(Vj.row(p).transpose());
      targets.add(V1 * weights.asDiagonal() * V2.transpose(), "t" + std::to_string(view) + "_" + std::to_string(p));
    }
  }
  return targets;
}

FitResult fit_population(const Matrix& D1, const Matrix& D2, const SourceModel& sources, const FitConfig& config,
                         double delta1, double delta2) {
  validate(config);
  const Matrix S12 = population_cross_covariance(D1, D2, sources);
  const WhiteningPair W = staged("whitening", [&] { return compute_whitening(S12, config.K, whitening_options(config)); });
  const TargetSet targets = staged("targets", [&] {
    if (config.method == Method::cumulant) return population_targets_cumulant(D1, D2, sources, W);
    if (config.method == Method::spectral) {
      Rng rng(derive_seed(config.seed, 2));
      return population_targets_gencov(D1, D2, sources, W,
                                       {direction_point(W, random_unit(rng, config.K), delta1, delta2)},
                                       config.model);
    }
    return population_targets_gencov(D1, D2, sources, W, assemble_points(W, config, delta1, delta2), config.model);
  });
  FitResult result = fit_targets(W, targets, config);
  result.diagnostics.whitening_residual = whitening_residual(S12, W);
  return result;
}

const char* method_name(Method m) noexcept {
  switch (m) {
    case Method::cumulant: return "cumulant";
    case Method::gencov: return "gencov";
    case Method::spectral: return "spectral";
  }
  return "unknown";
}

const char* model_name(ModelKind m) noexcept {
  switch (m) {
    case ModelKind::dcca: return "dcca";
    case ModelKind::ncca: return "ncca";
    case ModelKind::mcca: return "mcca";
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  if (s == "cumulant") return Method::cumulant;
  if (s == "gencov") return Method::gencov;
  if (s == "spectral") return Method::spectral;
  throw Error(Errc::invalid_argument, "unknown method '" + s + "' (expected cumulant, gencov or spectral)");
}

ModelKind parse_model(const std::string& s) {
  if (s == "dcca" || s == "DCCA") return ModelKind::dcca;
  if (s == "ncca" || s == "NCCA") return ModelKind::ncca;
  if (s == "mcca" || s == "MCCA") return ModelKind::mcca;
  throw Error(Errc::invalid_argument, "unknown model '" + s + "' (expected dcca, ncca or mcca)");
}

}  // namespace mmcca
