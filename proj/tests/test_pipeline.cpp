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
#include <string>

#include "helpers.hpp"
#include "mmcca/error.hpp"
#include "mmcca/eval.hpp"
#include "mmcca/moments.hpp"
#include "mmcca/pipeline.hpp"
#include "mmcca/synthetic.hpp"

using namespace mmcca;
using testing::max_abs;

namespace {

template <typename F>
Errc error_code(F&& f, std::string* stage = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (stage) *stage = e.stage();
    return e.code();
  }
  FAIL("expected an error");
  return Errc::invalid_argument;
}

struct PopulationCase {
  Matrix D1, D2;
  SourceModel sources;
  double delta1 = 0.0, delta2 = 0.0;
};

// Discrete population with gamma sources; delta_j = 0.1 / (mean entry of x_j).
PopulationCase discrete_population(std::uint64_t seed, Index M1, Index M2, Index K) {
  DiscreteParams p;
  p.M1 = M1;
  p.M2 = M2;
  p.K = K;
  p.K1 = M1;
  p.K2 = M2;
  const DiscreteInstance inst = gen_discrete_instance(p, seed);
  PopulationCase c;
  c.D1 = inst.D1;
  c.D2 = inst.D2;
  c.sources = SourceModel{SourceLaw::gamma, Vector::Constant(K, p.c), Vector::Constant(K, inst.b)};
  c.delta1 = 0.1 * M1 / (p.Ls + p.Ln);
  c.delta2 = 0.1 * M2 / (p.Ls + p.Ln);
  return c;
}

PopulationCase continuous_population(std::uint64_t seed, Index M, Index K, SourceLaw law) {
  ContinuousParams p;
  p.M1 = p.M2 = M;
  p.K = K;
  const ContinuousInstance inst = gen_continuous_instance(p, seed);
  PopulationCase c;
  c.D1 = inst.D1;
  c.D2 = inst.D2;
  c.sources = SourceModel{law, Vector::Constant(K, p.c), Vector::Constant(K, inst.b)};
  if (law == SourceLaw::gaussian) c.sources.shape = Vector::Constant(K, 1.0 / (inst.b * inst.b));
  // Scale of a sample of the data, as the data pipeline would pick it.
  const Sample s = sample_continuous(inst, 2000, seed + 1);
  c.delta1 = processing_scale(s.X1, 0.1);
  c.delta2 = processing_scale(s.X2, 0.1);
  return c;
}

FitResult population_fit(const PopulationCase& c, ModelKind model, Method method, Index K,
                         WhiteningMethod whitening = WhiteningMethod::exact) {
  FitConfig config;
  config.model = model;
  config.method = method;
  config.K = K;
  config.whitening = whitening;
  config.seed = 3;
  return fit_population(c.D1, c.D2, c.sources, config, c.delta1, c.delta2);
}

// Analytic diagonal form of the deflated generalized covariance of a
// Poisson-gamma model, from the gamma CGF Hessian c / (b - h)^2.
Matrix analytic_dcca_target(const Matrix& D1, const Matrix& D2, double c, double b, const ProcessingPoint& t) {
  const Vector h = D1.transpose() * (t.t1.array().exp() - 1.0).matrix() +
                   D2.transpose() * (t.t2.array().exp() - 1.0).matrix();
  const Vector C = (c / (b - h.array()).square()).matrix();
  return D1 * C.asDiagonal() * D2.transpose();
}

}  // namespace

TEST_CASE("processing scale examples") {
  CHECK(processing_scale(ViewMatrix::dense(Matrix::Ones(3, 4)), 0.1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(processing_scale(ViewMatrix::dense(Matrix::Constant(3, 4, 2.0)), 0.1) ==
        doctest::Approx(0.05).epsilon(1e-15));
  CHECK(error_code([] { processing_scale(ViewMatrix::dense(Matrix::Zero(2, 3)), 0.1); }) == Errc::scale);
  FitConfig zero;
  zero.delta = 0.0;
  CHECK(error_code([&] { validate(zero); }) == Errc::invalid_argument);
  FitConfig k0;
  k0.K = 0;
  CHECK(error_code([&] { validate(k0); }) == Errc::invalid_argument);
}

TEST_CASE("processing points are zero then scaled whitening rows") {
  Rng rng(1);
  WhiteningPair W;
  W.W1 = rng.normal_matrix(2, 4);
  W.W2 = rng.normal_matrix(2, 3);
  W.singular_values = Vector::Ones(2);
  const std::vector<ProcessingPoint> pts = build_processing_points(W, 0.5, 2.0);
  REQUIRE(pts.size() == 5);
  CHECK(pts[0].t1.isZero(0.0));
  CHECK(pts[0].t2.isZero(0.0));
  CHECK(max_abs(pts[1].t1 - 0.5 * W.W1.row(0).transpose()) == 0.0);
  CHECK(pts[1].t2.isZero(0.0));
  CHECK(max_abs(pts[4].t2 - 2.0 * W.W2.row(1).transpose()) == 0.0);
  CHECK(pts[4].t1.isZero(0.0));
}

TEST_CASE("the first target is the identity") {
  const DiscreteInstance inst = gen_discrete_instance(DiscreteParams{}, 2);
  const Sample s = sample_discrete(inst, 3000, 3);
  const WhiteningPair W = compute_whitening(CrossCovarianceOperator(s.X1, s.X2), 4);
  const TargetSet gen = build_targets_gencov(s.X1, s.X2, W, build_processing_points(W, s.X1, s.X2, 0.1), ModelKind::dcca);
  CHECK(gen.size() == 9);
  CHECK(max_abs(gen[0] - Matrix::Identity(4, 4)) < 1e-8);
  const TargetSet cum = build_targets_cumulant(s.X1, s.X2, W);
  CHECK(cum.size() == 9);
  CHECK(max_abs(cum[0] - Matrix::Identity(4, 4)) < 1e-8);
}

TEST_CASE("deflated targets approach their analytic diagonal forms at N = 1e5") {
  DiscreteParams p;
  p.M1 = p.M2 = 8;
  p.K = 3;
  p.K1 = p.K2 = 8;
  const DiscreteInstance inst = gen_discrete_instance(p, 4);
  const Sample s = sample_discrete(inst, 100000, 5);
  const WhiteningPair W = compute_whitening(CrossCovarianceOperator(s.X1, s.X2), p.K);
  const std::vector<ProcessingPoint> pts = build_processing_points(W, s.X1, s.X2, 0.1);
  const TargetSet targets = build_targets_gencov(s.X1, s.X2, W, pts, ModelKind::dcca);
  REQUIRE(targets.size() == static_cast<Index>(pts.size()));
  const SourceModel src{SourceLaw::gamma, Vector::Constant(p.K, p.c), Vector::Constant(p.K, inst.b)};
  const TargetSet pop = population_targets_gencov(inst.D1, inst.D2, src, W, pts, ModelKind::dcca);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Matrix expect = W.W1 * analytic_dcca_target(inst.D1, inst.D2, p.c, inst.b, pts[i]) * W.W2.transpose();
    const Index k = static_cast<Index>(i);
    CHECK_MESSAGE((targets[k] - expect).norm() / expect.norm() <= 0.05, "point " << i);
    CHECK(max_abs(pop[k] - expect) <= 1e-10 * max_abs(expect));
  }
}

TEST_CASE("NCCA targets depend on t only through D1^T t1") {
  const PopulationCase c = continuous_population(6, 5, 2, SourceLaw::symmetric_gamma);
  // A left null vector of D1^T.
  const Eigen::FullPivLU<Matrix> lu(c.D1.transpose());
  const Vector null = lu.kernel().col(0);
  REQUIRE(max_abs(c.D1.transpose() * null) < 1e-12);
  ProcessingPoint a{c.delta1 * Vector::LinSpaced(5, -1, 1), Vector::Zero(5)};
  ProcessingPoint b = a;
  b.t1 += 3.0 * c.delta1 * null;
  const Matrix Ta = population_gen_cross_covariance(ModelKind::ncca, c.D1, c.D2, c.sources, a);
  const Matrix Tb = population_gen_cross_covariance(ModelKind::ncca, c.D1, c.D2, c.sources, b);
  CHECK(max_abs(Ta - Tb) <= 1e-12 * max_abs(Ta));
  CHECK(max_abs(Ta - population_cross_covariance(c.D1, c.D2, c.sources)) > 0.0);
}

TEST_CASE("cumulant targets agree with the naive tensor on tiny instances") {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const Index M = 2 + rep % 3, N = 8 + rep;
    const Matrix X1 = testing::random_counts(rng, M, N, 2.0);
    const Matrix X2 = testing::random_counts(rng, M, N, 2.0);
    const ViewMatrix A = ViewMatrix::dense(X1).to_sparse(), B = ViewMatrix::dense(X2).to_sparse();
    WhiteningPair W;
    W.W1 = rng.normal_matrix(2, M);
    W.W2 = rng.normal_matrix(2, M);
    W.singular_values = Vector::Ones(2);
    const TargetSet T = build_targets_cumulant(A, B, W);
    for (int view = 1; view <= 2; ++view) {
      const Tensor3 naive = naive_t_cumulant(A, B, view);
      for (Index p = 0; p < 2; ++p) {
        const Vector v = (view == 1 ? W.W1 : W.W2).transpose() * Vector::Unit(2, p);
        const Matrix expect = W.W1 * project_tensor(naive, v) * W.W2.transpose();
        CHECK(max_abs(T[1 + (view - 1) * 2 + p] - expect) <= 1e-9 * std::max(1.0, max_abs(expect)));
      }
    }
  }
}

TEST_CASE("recovery sign rule and normalization") {
  WhiteningPair W;
  W.W1 = Matrix::Identity(2, 2);
  W.W2 = Matrix::Identity(2, 2);
  W.singular_values = Vector::Ones(2);
  Matrix Q(2, 2);
  Q << -1, 3, 0, -1;
  // D1 = Q: column 0 all negative, column 1 mostly positive.
  const Loadings d = recover_loadings(W, Q, ModelKind::dcca);
  CHECK(d.D1(0, 0) == doctest::Approx(1.0));
  CHECK(d.D1(1, 0) == 0.0);
  CHECK(d.D1(0, 1) == doctest::Approx(1.0));
  CHECK(d.D1(1, 1) == 0.0);
  CHECK((d.D2.array() >= 0.0).all());
  CHECK(max_abs(d.D2.colwise().sum().array() - 1.0) < 1e-15);
  const Loadings n = recover_loadings(W, Q, ModelKind::ncca);
  CHECK(n.D1(0, 0) == doctest::Approx(-1.0));
  CHECK(n.D1(0, 1) == doctest::Approx(0.75));
  CHECK(n.D1(1, 1) == doctest::Approx(-0.25));
  const Loadings m = recover_loadings(W, Q, ModelKind::mcca);
  CHECK(m.D1(0, 0) == doctest::Approx(-1.0));
  CHECK((m.D2.array() >= 0.0).all());
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK(error_code([&] { recover_loadings(W, singular, ModelKind::dcca); }) == Errc::singular);
}

TEST_CASE("noiseless discrete pipelines recover the loadings") {
  const PopulationCase c = discrete_population(8, 12, 10, 4);
  const FitResult gen = population_fit(c, ModelKind::dcca, Method::gencov, 4);
  const FitResult cum = population_fit(c, ModelKind::dcca, Method::cumulant, 4);
  const FitResult spectral_fit = population_fit(c, ModelKind::dcca, Method::spectral, 4);
  for (const FitResult* f : {&gen, &cum, &spectral_fit}) {
    const MatchResult r1 = l1_error(f->loadings.D1, c.D1);
    const MatchResult r2 = l1_error(f->loadings.D2, c.D2);
    CHECK(r1.error < 1e-6);
    CHECK(r2.error < 1e-6);
    CHECK(r1.permutation == r2.permutation);
    CHECK(f->diagnostics.whitening_residual < 1e-8);
    CHECK_FALSE(f->diagnostics.flagged);
  }
  // The two NOJD variants agree with each other.
  CHECK(l1_error(gen.loadings.D1, cum.loadings.D1).error < 1e-6);
  CHECK(l1_error(gen.loadings.D2, cum.loadings.D2).error < 1e-6);
}

TEST_CASE("noiseless K = 1 recovery is unique up to scale") {
  const PopulationCase c = discrete_population(9, 5, 4, 1);
  const FitResult f = population_fit(c, ModelKind::dcca, Method::gencov, 1);
  CHECK(max_abs(f.loadings.D1 - c.D1) < 1e-10);
  CHECK(max_abs(f.loadings.D2 - c.D2) < 1e-10);
}

TEST_CASE("noiseless continuous and mixed pipelines recover the loadings") {
  const PopulationCase c = continuous_population(10, 8, 3, SourceLaw::symmetric_gamma);
  for (Method m : {Method::gencov, Method::spectral}) {
    const FitResult f = population_fit(c, ModelKind::ncca, m, 3);
    const MatchResult r1 = l1_error(f.loadings.D1, c.D1, true);
    const MatchResult r2 = l1_error(f.loadings.D2, c.D2, true);
    CHECK(r1.error < 1e-6);
    CHECK(r2.error < 1e-6);
    CHECK(r1.permutation == r2.permutation);
  }
  // Asymmetric gamma sources with a count second view.
  PopulationCase mixed = discrete_population(11, 7, 6, 3);
  const FitResult f = population_fit(mixed, ModelKind::mcca, Method::gencov, 3);
  CHECK(l1_error(f.loadings.D1, mixed.D1, true).error < 1e-6);
  CHECK(l1_error(f.loadings.D2, mixed.D2).error < 1e-6);
  CHECK((f.loadings.D2.array() >= 0.0).all());
}

TEST_CASE("continuous view scaling leaves the loadings unchanged") {
  const PopulationCase c = continuous_population(12, 6, 3, SourceLaw::symmetric_gamma);
  PopulationCase scaled = c;
  // x1 -> 7 x1 scales D1, and the data-driven processing scale shrinks by 7.
  scaled.D1 *= 7.0;
  scaled.delta1 /= 7.0;
  const FitResult a = population_fit(c, ModelKind::ncca, Method::gencov, 3);
  const FitResult b = population_fit(scaled, ModelKind::ncca, Method::gencov, 3);
  CHECK(l1_error(a.loadings.D1, b.loadings.D1, true).error < 1e-8);
  CHECK(l1_error(a.loadings.D2, b.loadings.D2, true).error < 1e-8);
}

TEST_CASE("randomized and exact whitening give the same noiseless fit") {
  const PopulationCase c = discrete_population(13, 40, 30, 5);
  const FitResult e = population_fit(c, ModelKind::dcca, Method::gencov, 5, WhiteningMethod::exact);
  const FitResult r = population_fit(c, ModelKind::dcca, Method::gencov, 5, WhiteningMethod::randomized);
  CHECK(r.diagnostics.whitening_residual < 1e-8);
  CHECK(l1_error(e.loadings.D1, r.loadings.D1).error < 1e-3);
  CHECK(l1_error(r.loadings.D1, c.D1).error < 1e-3);
}

TEST_CASE("Gaussian sources are flagged, not silently wrong") {
  const PopulationCase c = continuous_population(14, 6, 3, SourceLaw::gaussian);
  for (Method m : {Method::gencov, Method::spectral}) {
    bool flagged = false;
    try {
      const FitResult f = population_fit(c, ModelKind::ncca, m, 3);
      flagged = f.diagnostics.flagged;
    } catch (const Error& e) {
      flagged = is_numerical(e.code());
    }
    CHECK(flagged);
  }
}

TEST_CASE("fits on data are deterministic and report diagnostics") {
  const DiscreteInstance inst = gen_discrete_instance(DiscreteParams{}, 15);
  const Sample s = sample_discrete(inst, 2000, 16);
  for (Method m : {Method::gencov, Method::cumulant, Method::spectral}) {
    FitConfig config;
    config.K = 10;
    config.method = m;
    config.seed = 17;
    const FitResult a = fit(s.X1, s.X2, config);
    const FitResult b = fit(s.X1, s.X2, config);
    CHECK(max_abs(a.loadings.D1 - b.loadings.D1) == 0.0);
    CHECK(max_abs(a.loadings.D2 - b.loadings.D2) == 0.0);
    CHECK(a.diagnostics.whitening_residual < 1e-8);
    CHECK((a.loadings.D1.array() >= 0.0).all());
    CHECK(max_abs(a.loadings.D1.colwise().sum().array() - 1.0) < 1e-12);
    CHECK(a.diagnostics.num_targets == (m == Method::spectral ? 1 : 21));
    CHECK(a.diagnostics.trace.size() >= 1);
    CHECK(l1_error(a.loadings.D1, inst.D1).error < 0.5);
  }
}

TEST_CASE("stage-labelled validation errors") {
  const DiscreteInstance inst = gen_discrete_instance(DiscreteParams{}, 18);
  const Sample s = sample_discrete(inst, 200, 19);
  Rng rng(20);
  const ViewMatrix continuous = ViewMatrix::dense(rng.normal_matrix(20, 200));
  FitConfig config;
  config.K = 3;
  std::string stage;

  config.method = Method::cumulant;
  config.model = ModelKind::ncca;
  CHECK(error_code([&] { fit(s.X1, s.X2, config); }, &stage) == Errc::invalid_argument);
  CHECK(stage == "validation");
  config.model = ModelKind::dcca;
  CHECK(error_code([&] { fit(continuous, s.X2, config); }, &stage) == Errc::invalid_argument);
  config.method = Method::gencov;
  CHECK(error_code([&] { fit(continuous, s.X2, config); }) == Errc::invalid_argument);
  config.model = ModelKind::mcca;
  CHECK(error_code([&] { fit(s.X1, continuous, config); }) == Errc::invalid_argument);
  const ViewMatrix short_view = ViewMatrix::dense(Matrix::Ones(20, 10));
  CHECK(error_code([&] { fit(s.X1, short_view, config); }) == Errc::dimension);

  config.model = ModelKind::dcca;
  const ViewMatrix zeros = ViewMatrix::dense(Matrix::Zero(20, 200));
  CHECK(error_code([&] { fit(s.X1, zeros, config); }, &stage) == Errc::scale);
  CHECK(stage == "processing points");

  config.K = 25;
  CHECK(error_code([&] { fit(s.X1, s.X2, config); }, &stage) == Errc::dimension);
  CHECK(stage == "whitening");
}

TEST_CASE("degenerate processing points are dropped, then fatal") {
  const DiscreteInstance inst = gen_discrete_instance(DiscreteParams{}, 21);
  const Sample s = sample_discrete(inst, 500, 22);
  FitConfig config;
  config.K = 3;
  ProcessingPoint huge{Vector::Constant(20, 50.0), Vector::Zero(20)};
  config.extra_points = {huge};
  const FitResult f = fit(s.X1, s.X2, config);
  REQUIRE(f.diagnostics.dropped.size() == 1);
  CHECK(f.diagnostics.dropped[0].index == 7);
  CHECK(f.diagnostics.num_targets == 7);
  CHECK_FALSE(f.diagnostics.warnings.empty());

  config.extra_points.clear();
  config.delta = 1e4;
  std::string stage;
  CHECK(error_code([&] { fit(s.X1, s.X2, config); }, &stage) == Errc::insufficient_targets);
  CHECK(stage == "targets");
}

TEST_CASE("extra and random processing points") {
  const DiscreteInstance inst = gen_discrete_instance(DiscreteParams{}, 23);
  const Sample s = sample_discrete(inst, 1000, 24);
  FitConfig config;
  config.K = 3;
  config.num_points = 12;
  const FitResult f = fit(s.X1, s.X2, config);
  CHECK(f.diagnostics.num_targets == 12);
  config.num_points = 3;
  CHECK(fit(s.X1, s.X2, config).diagnostics.num_targets == 3);
}

TEST_CASE("names round-trip") {
  for (Method m : {Method::cumulant, Method::gencov, Method::spectral}) CHECK(parse_method(method_name(m)) == m);
  for (ModelKind k : {ModelKind::dcca, ModelKind::ncca, ModelKind::mcca}) CHECK(parse_model(model_name(k)) == k);
  CHECK_THROWS_AS(parse_method("jade"), Error);
}
