#include "doctest.h"
#include "otda/data.hpp"
#include "otda/pipeline.hpp"

#include <random>

using namespace otda;

namespace {

LabeledDataset blobs(Index per_class, double gap, double spread,
                     uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  LabeledDataset out;
  out.X.resize(2 * per_class, 2);
  out.y.resize(static_cast<size_t>(2 * per_class));
  out.class_names = {"0", "1"};
  for (int cls = 0; cls < 2; ++cls)
    for (Index i = 0; i < per_class; ++i) {
      const Index row = cls * per_class + i;
      out.X(row, 0) = cls * gap + noise(rng);
      out.X(row, 1) = cls * gap + noise(rng);
      out.y[static_cast<size_t>(row)] = cls;
    }
  return out;
}

double same_label_mass(const Matrix& plan, const std::vector<int>& ys,
                       const std::vector<int>& yt) {
  double mass = 0.0;
  for (Index i = 0; i < plan.rows(); ++i)
    for (Index j = 0; j < plan.cols(); ++j)
      if (ys[static_cast<size_t>(i)] == yt[static_cast<size_t>(j)])
        mass += plan(i, j);
  return mass;
}

}  // namespace

TEST_CASE("method names round-trip") {
  CHECK(method_from_string("exact") == Method::ExactOT);
  CHECK(method_from_string("OT-exact") == Method::ExactOT);
  CHECK(method_from_string("sinkhorn") == Method::EntropicOT);
  CHECK(method_from_string("OT-IT") == Method::EntropicOT);
  CHECK(method_from_string("gl") == Method::GroupLassoOT);
  CHECK(method_from_string("OT-GL") == Method::GroupLassoOT);
  CHECK(method_from_string("laplace") == Method::LaplaceOT);
  CHECK(method_from_string("OT-Laplace") == Method::LaplaceOT);
  CHECK(method_name(Method::GroupLassoOT) == "OT-GL");
  CHECK_THROWS_WITH_AS(method_from_string("simplex"),
                       "unknown method: simplex", Error);
}

TEST_CASE("exact fit undoes a positive-definite affine shift") {
  const AffineInstance inst = affine_instance(12, 3, 77);
  LabeledDataset source;
  source.X = inst.Xs;
  source.y.assign(12, 0);
  const AdaptationModel model =
      fit(Method::ExactOT, source, inst.Xt, FitConfig{});
  CHECK((model.mapped_source - inst.Xt).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(model.coupling.marginal_residual() <= 1e-9);
  CHECK_FALSE(model.semi_supervised);
}

TEST_CASE("huge entropy collapses the mapping to the target mean") {
  const LabeledDataset source = blobs(5, 2.0, 0.2, 1);
  const LabeledDataset target = blobs(5, 2.0, 0.2, 2);
  FitConfig cfg;
  cfg.lambda = 1e6;
  const AdaptationModel model =
      fit(Method::EntropicOT, source, target.X, cfg);
  const Vector mean = target.X.colwise().mean().transpose();
  for (Index i = 0; i < source.size(); ++i)
    CHECK((model.mapped_source.row(i).transpose() - mean).norm() <= 1e-3);
}

TEST_CASE("a zero-weight class penalty reduces to the entropic fit") {
  // keep the clusters close: far-apart blobs give the scaling kernel a
  // bottleneck and the marginals equilibrate too slowly for a unit test
  const LabeledDataset source = blobs(6, 2.0, 0.4, 3);
  const LabeledDataset target = blobs(6, 2.0, 0.4, 4);
  FitConfig ent;
  ent.lambda = 1.0;
  const AdaptationModel base =
      fit(Method::EntropicOT, source, target.X, ent);
  FitConfig gl = ent;
  gl.eta = 0.0;
  const AdaptationModel zero =
      fit(Method::GroupLassoOT, source, target.X, gl);
  CHECK((base.coupling.plan - zero.coupling.plan).cwiseAbs().maxCoeff() <=
        1e-8);
  CHECK_FALSE(base.trace.records.size());     // plain scaling leaves no trace
  CHECK(zero.trace.records.size() >= 2);
}

TEST_CASE("laplacian fits run with and without the target graph") {
  const LabeledDataset source = blobs(6, 2.0, 0.4, 5);
  const LabeledDataset target = blobs(6, 2.0, 0.4, 6);
  FitConfig cfg;
  cfg.lambda = 1.0;
  cfg.eta = 0.2;
  cfg.graph_k = 3;

  cfg.alpha = 0.0;  // source graph only
  const AdaptationModel source_only =
      fit(Method::LaplaceOT, source, target.X, cfg);
  CHECK(source_only.coupling.marginal_residual() <= 1e-7);
  CHECK(source_only.trace.records.size() >= 2);

  cfg.alpha = 0.5;  // both graphs
  const AdaptationModel both = fit(Method::LaplaceOT, source, target.X, cfg);
  CHECK(both.coupling.marginal_residual() <= 1e-7);
  CHECK(both.mapped_source.allFinite());
}

TEST_CASE("fit validation errors") {
  LabeledDataset source = blobs(3, 2.0, 0.2, 7);
  const LabeledDataset target = blobs(3, 2.0, 0.2, 8);
  CHECK_THROWS_WITH_AS(fit(Method::ExactOT, source, Matrix(0, 2), FitConfig{}),
                       "empty measure", Error);
  CHECK_THROWS_WITH_AS(
      fit(Method::ExactOT, source, Matrix::Zero(3, 5), FitConfig{}),
      "feature dimension mismatch", Error);
  source.y.pop_back();
  CHECK_THROWS_WITH_AS(fit(Method::ExactOT, source, target.X, FitConfig{}),
                       "label count mismatch", Error);
}

TEST_CASE("nearest-neighbor tie rules") {
  // distance tie: both train points coincide; the smaller index wins
  Matrix coincident(2, 1);
  coincident << 0.0, 0.0;
  const std::vector<int> flip = {1, 0};
  Matrix probe(1, 1);
  probe << 0.0;
  CHECK(knn_predict(coincident, flip, probe, 1) == std::vector<int>{1});

  // vote tie at k=4: classes {1,0,0,1}; class 1 holds train index 0
  Matrix line(4, 1);
  line << 0.0, 0.1, 0.2, 0.3;
  const std::vector<int> y = {1, 0, 0, 1};
  Matrix mid(1, 1);
  mid << 0.15;
  CHECK(knn_predict(line, y, mid, 4) == std::vector<int>{1});

  // plain majority at k=3
  Matrix apart(3, 1);
  apart << 0.0, 0.1, 5.0;
  const std::vector<int> y2 = {0, 0, 1};
  CHECK(knn_predict(apart, y2, mid, 3) == std::vector<int>{0});

  CHECK_THROWS_WITH_AS(knn_predict(Matrix(0, 1), {}, probe, 1),
                       "empty training set", Error);
  CHECK_THROWS_WITH_AS(knn_predict(line, {1, 0}, probe, 1),
                       "label count mismatch", Error);
  CHECK_THROWS_WITH_AS(knn_predict(line, y, Matrix::Zero(1, 2), 1),
                       "feature dimension mismatch", Error);
  CHECK_THROWS_WITH_AS(knn_predict(line, y, probe, 0),
                       "neighborhood too large", Error);
  CHECK_THROWS_WITH_AS(knn_predict(line, y, probe, 5),
                       "neighborhood too large", Error);
}

TEST_CASE("evaluation arithmetic") {
  const std::vector<int> truth = {0, 0, 1, 1, 1};
  const std::vector<int> pred = {0, 1, 1, 1, 0};
  const Evaluation e = evaluate(pred, truth);
  CHECK(e.accuracy == doctest::Approx(0.6));
  CHECK(e.error_rate == doctest::Approx(0.4));
  CHECK(e.per_class_accuracy.at(0) == doctest::Approx(0.5));
  CHECK(e.per_class_accuracy.at(1) == doctest::Approx(2.0 / 3.0));

  CHECK_THROWS_WITH_AS(evaluate({0, 1}, {0}), "length mismatch", Error);
  CHECK_THROWS_WITH_AS(evaluate({}, {}), "empty evaluation", Error);
}

TEST_CASE("grid search breaks accuracy ties toward the smaller point") {
  // trivially separable blobs: every configuration scores 1.0
  const LabeledDataset source = blobs(5, 6.0, 0.2, 9);
  const LabeledDataset validation = blobs(5, 6.0, 0.2, 10);
  const std::vector<GridPoint> grid = {
      {2.0, 1.0}, {1.0, 2.0}, {1.0, 1.0}, {2.0, 2.0}};
  FitConfig base;
  const GridResult r =
      grid_validate(Method::EntropicOT, source, validation, grid, base);
  CHECK(r.best_accuracy == 1.0);
  CHECK(r.best.lambda == 1.0);
  CHECK(r.best.eta == 1.0);
  REQUIRE(r.scores.size() == 4);
  for (const GridScore& s : r.scores) CHECK(s.accuracy == 1.0);
  // scores keep the submitted grid order
  CHECK(r.scores[0].point.lambda == 2.0);
  CHECK(r.scores[1].point.eta == 2.0);

  CHECK_THROWS_WITH_AS(grid_validate(Method::EntropicOT, source, validation,
                                     {}, base),
                       "empty grid", Error);
}

TEST_CASE("parallel grid evaluation is deterministic") {
  // overlapping clusters keep every grid lambda in the fast-mixing regime
  const LabeledDataset source = blobs(6, 1.0, 0.5, 11);
  const LabeledDataset validation = blobs(6, 1.0, 0.5, 12);
  const std::vector<GridPoint> grid = {
      {0.5, 0.5}, {1.0, 0.5}, {0.5, 1.0}, {1.0, 1.0}, {2.0, 1.0}};
  FitConfig base;
  const GridResult a = grid_validate(Method::GroupLassoOT, source, validation,
                                     grid, base, 1, 1);
  const GridResult b = grid_validate(Method::GroupLassoOT, source, validation,
                                     grid, base, 1, 3);
  CHECK(a.best.lambda == b.best.lambda);
  CHECK(a.best.eta == b.best.eta);
  REQUIRE(a.scores.size() == b.scores.size());
  for (size_t i = 0; i < a.scores.size(); ++i)
    CHECK(a.scores[i].accuracy == b.scores[i].accuracy);
  CHECK((a.best_model.coupling.plan.array() ==
         b.best_model.coupling.plan.array())
            .all());
}

TEST_CASE("all-unknown partial labels reproduce the unsupervised plan "
          "bit for bit") {
  const LabeledDataset source = blobs(6, 2.0, 0.4, 13);
  const LabeledDataset target = blobs(6, 2.0, 0.4, 14);
  FitConfig cfg;
  cfg.lambda = 2.0;
  const AdaptationModel plain =
      fit(Method::EntropicOT, source, target.X, cfg);
  const std::vector<int> unknown(static_cast<size_t>(target.size()), -1);
  const AdaptationModel masked =
      fit(Method::EntropicOT, source, target.X, cfg, unknown);
  CHECK(masked.semi_supervised);
  CHECK((plain.coupling.plan.array() == masked.coupling.plan.array()).all());
  CHECK((plain.mapped_source.array() == masked.mapped_source.array()).all());
}

TEST_CASE("known target labels steer mass onto matching classes") {
  const LabeledDataset source = blobs(8, 1.0, 0.6, 15);  // heavy overlap
  const LabeledDataset target = blobs(8, 1.0, 0.6, 16);
  FitConfig cfg;
  cfg.lambda = 2.0;
  const AdaptationModel plain =
      fit(Method::EntropicOT, source, target.X, cfg);
  const double loose = same_label_mass(plain.coupling.plan, source.y,
                                       target.y);
  CHECK(loose < 0.999);  // overlapping blobs leak mass across classes

  const AdaptationModel guided =
      fit(Method::EntropicOT, source, target.X, cfg, target.y);
  const double mass = same_label_mass(guided.coupling.plan, source.y,
                                      target.y);
  CHECK(mass >= 0.999);
}

TEST_CASE("per-class subsampling is seeded and bounded") {
  LabeledDataset data;
  data.X.resize(9, 1);
  for (Index i = 0; i < 9; ++i) data.X(i, 0) = static_cast<double>(i);
  data.y = {0, 0, 0, 0, 0, 1, 1, 1, 1};
  data.class_names = {"a", "b"};

  std::mt19937_64 rng(21);
  const LabeledDataset s = subsample_per_class(data, 3, rng);
  REQUIRE(s.size() == 6);
  CHECK(std::count(s.y.begin(), s.y.end(), 0) == 3);
  CHECK(std::count(s.y.begin(), s.y.end(), 1) == 3);
  // classes are emitted in ascending id order
  CHECK(s.y == std::vector<int>{0, 0, 0, 1, 1, 1});
  // rows come from the right class partitions
  for (Index i = 0; i < 3; ++i) CHECK(s.X(i, 0) <= 4.0);
  for (Index i = 3; i < 6; ++i) CHECK(s.X(i, 0) >= 5.0);

  std::mt19937_64 rng2(21);
  const LabeledDataset again = subsample_per_class(data, 3, rng2);
  CHECK((s.X.array() == again.X.array()).all());

  std::mt19937_64 rng3(1);
  const LabeledDataset all = subsample_per_class(data, 50, rng3);
  CHECK(all.size() == 9);  // classes smaller than the request are kept whole
}

TEST_CASE("random halves partition the dataset") {
  LabeledDataset data;
  data.X.resize(9, 1);
  for (Index i = 0; i < 9; ++i) data.X(i, 0) = static_cast<double>(i);
  data.y = {0, 1, 0, 1, 0, 1, 0, 1, 0};
  data.class_names = {"a", "b"};

  std::mt19937_64 rng(31);
  const auto [first, second] = split_half(data, rng);
  CHECK(first.size() == 5);
  CHECK(second.size() == 4);
  std::vector<double> seen;
  for (Index i = 0; i < first.size(); ++i) seen.push_back(first.X(i, 0));
  for (Index i = 0; i < second.size(); ++i) seen.push_back(second.X(i, 0));
  std::sort(seen.begin(), seen.end());
  for (Index i = 0; i < 9; ++i) CHECK(seen[static_cast<size_t>(i)] == i);
}
