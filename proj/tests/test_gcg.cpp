#include "doctest.h"
#include "otda/gcg.hpp"

#include <cmath>
#include <random>
#include <string>

using namespace otda;

namespace {

CostMatrix wrap(Matrix values) {
  CostMatrix c;
  c.values = std::move(values);
  return c;
}

DiscreteMeasure uniform(Index n) {
  return uniform_measure(Matrix::Zero(n, 1));
}

Matrix random_costs(Index ns, Index nt, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix C(ns, nt);
  for (Index i = 0; i < ns; ++i)
    for (Index j = 0; j < nt; ++j) C(i, j) = unif(rng);
  return C;
}

double composite_objective(const Matrix& plan, const Matrix& C,
                           const GcgConfig& cfg, double reg_value) {
  return (plan.array() * C.array()).sum() + cfg.lambda * negentropy(plan) +
         cfg.eta * reg_value;
}

void check_trace(const SolveTrace& trace) {
  REQUIRE(trace.records.size() >= 2);
  CHECK(trace.records.front().step == 0.0);
  for (size_t k = 0; k + 1 < trace.records.size(); ++k)
    CHECK(trace.records[k + 1].objective <=
          trace.records[k].objective + 1e-10);
  for (const IterationRecord& rec : trace.records) {
    CHECK(rec.residual <= 1e-7);
    CHECK(rec.step >= 0.0);
    CHECK(rec.step <= 1.0);
  }
}

}  // namespace

TEST_CASE("without a class penalty the solver reduces to plain scaling") {
  const Matrix C = random_costs(5, 4, 8);
  GcgConfig cfg;
  cfg.lambda = 0.5;
  const auto [g, trace] = solve_gcg(uniform(5), uniform(4), wrap(C), cfg);
  SinkhornOptions opts;
  opts.lambda = 0.5;
  const Coupling ref = solve_entropic(uniform(5), uniform(4), wrap(C), opts);
  CHECK((g.plan - ref.plan).cwiseAbs().maxCoeff() <= 1e-8);
  check_trace(trace);
}

TEST_CASE("zero penalty weight ignores the attached regularizer") {
  const Matrix C = random_costs(4, 4, 9);
  GcgConfig none;
  none.lambda = 0.5;
  const auto [g0, t0] = solve_gcg(uniform(4), uniform(4), wrap(C), none);

  GcgConfig gl = none;
  gl.eta = 0.0;
  gl.regularizer = Regularizer::GroupLasso;
  RegContext ctx = GroupLassoContext{groups_from_labels({0, 0, 1, 1})};
  const auto [g1, t1] = solve_gcg(uniform(4), uniform(4), wrap(C), gl, ctx);
  CHECK((g0.plan - g1.plan).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("group-lasso run produces a monotone feasible trace") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss(0.0, 0.3);
  Matrix Xs(6, 2), Xt(5, 2);
  for (Index i = 0; i < 6; ++i) {
    Xs(i, 0) = (i < 3 ? 0.0 : 3.0) + gauss(rng);
    Xs(i, 1) = gauss(rng);
  }
  for (Index i = 0; i < 5; ++i) {
    Xt(i, 0) = (i < 3 ? 0.5 : 3.5) + gauss(rng);
    Xt(i, 1) = gauss(rng);
  }
  Matrix C(6, 5);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 5; ++j)
      C(i, j) = (Xs.row(i) - Xt.row(j)).squaredNorm();

  GcgConfig cfg;
  cfg.lambda = 0.5;
  cfg.eta = 0.5;
  cfg.regularizer = Regularizer::GroupLasso;
  RegContext ctx = GroupLassoContext{groups_from_labels({0, 0, 0, 1, 1, 1})};
  const auto [g, trace] = solve_gcg(uniform(6), uniform(5), wrap(C), cfg, ctx);
  check_trace(trace);
  CHECK(g.marginal_residual() <= 1e-7);
  CHECK(g.plan.minCoeff() > 0.0);
  // the composite objective actually moved from the independent coupling
  CHECK(trace.records.back().objective < trace.records.front().objective);
}

TEST_CASE("laplacian run beats the entropy-only plan on its own objective") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix Xs(4, 2), Xt(4, 2);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 2; ++j) {
      Xs(i, j) = unif(rng);
      Xt(i, j) = unif(rng) + 0.5;
    }
  Matrix C(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      C(i, j) = (Xs.row(i) - Xt.row(j)).squaredNorm();

  const SimilarityGraph gs = build_target_graph(Xs, 1);
  const SimilarityGraph gt = build_target_graph(Xt, 1);
  GcgConfig cfg;
  cfg.lambda = 0.5;
  cfg.eta = 0.3;
  cfg.rel_tol = 1e-12;  // run close enough to the composite optimum
  cfg.max_outer_iters = 500;
  cfg.regularizer = Regularizer::Laplacian;
  LaplacianContext lap;
  lap.Xs = Xs;
  lap.Xt = Xt;
  lap.Ls = gs.laplacian;
  lap.Lt = gt.laplacian;
  lap.alpha = 0.5;
  RegContext ctx = lap;
  const auto [g, trace] = solve_gcg(uniform(4), uniform(4), wrap(C), cfg, ctx);
  check_trace(trace);

  SinkhornOptions opts;
  opts.lambda = cfg.lambda;
  const Coupling plain = solve_entropic(uniform(4), uniform(4), wrap(C), opts);
  const double reg_plain =
      laplacian_reg(plain.plan, Xs, Xt, gs.laplacian, &gt.laplacian, 0.5)
          .value;
  const double F_plain = composite_objective(plain.plan, C, cfg, reg_plain);
  CHECK(trace.records.back().objective <= F_plain + 1e-9);
}

TEST_CASE("line search on a pure quadratic hits the closed form") {
  Matrix gamma = Matrix::Constant(2, 2, 0.25);
  Matrix star(2, 2);
  star << 0.5, 0, 0, 0.5;
  const Matrix delta = star - gamma;
  Matrix C(2, 2);
  C << 0, 1, 1, 0;
  Matrix Ls(2, 2);
  Ls << 4, -4, -4, 4;
  Matrix X(2, 1);
  X << 0, 1;

  GcgConfig cfg;
  cfg.lambda = 0.0;  // entropy off: restriction is exactly quadratic
  cfg.eta = 1.0;
  cfg.regularizer = Regularizer::Laplacian;
  LaplacianContext lap;
  lap.Xs = X;
  lap.Xt = X;
  lap.Ls = Ls;
  lap.alpha = 0.0;
  RegContext ctx = lap;

  // phi(a) = <gamma + a*delta, C> + eta*quad(a); assemble the closed-form
  // minimizer from the same primitives
  const double lin1 = (delta.array() * C.array()).sum();
  const RegValueGrad at_gamma = laplacian_reg(gamma, X, X, Ls, nullptr, 0.0);
  const double d0 = (at_gamma.gradient.array() * delta.array()).sum();
  const double vd = laplacian_reg(delta, X, X, Ls, nullptr, 0.0).value;
  const double a_star = -(lin1 + cfg.eta * d0) / (2.0 * cfg.eta * vd);
  REQUIRE(a_star > 0.0);
  REQUIRE(a_star < 1.0);

  const double got = line_search(gamma, delta, wrap(C), cfg, ctx);
  CHECK(std::abs(got - a_star) <= 1e-8);
}

TEST_CASE("line search endpoint and degenerate cases") {
  const Matrix gamma = Matrix::Constant(2, 2, 0.25);
  Matrix C(2, 2);
  C << 0, 1, 1, 0;
  GcgConfig cfg;
  cfg.lambda = 0.5;

  CHECK(line_search(gamma, Matrix::Zero(2, 2), wrap(C), cfg, {}) == 0.0);

  // moving mass toward the expensive cells only increases the objective
  Matrix uphill(2, 2);
  uphill << -0.1, 0.1, 0.1, -0.1;
  CHECK(line_search(gamma, uphill, wrap(C), cfg, {}) == 0.0);

  CHECK_THROWS_WITH_AS(line_search(gamma, Matrix::Zero(3, 3), wrap(C), cfg, {}),
                       "dimension mismatch", Error);
  GcgConfig bad = cfg;
  bad.lambda = -1.0;
  Matrix delta(2, 2);
  delta << 0.1, -0.1, -0.1, 0.1;
  CHECK_THROWS_WITH_AS(line_search(gamma, delta, wrap(C), bad, {}),
                       "invalid solver options", Error);

  Matrix nan_costs = C;
  nan_costs(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(line_search(gamma, delta, wrap(nan_costs), cfg, {}),
                       "line search domain", Error);
}

TEST_CASE("line search minimizes the entropic restriction globally") {
  const Matrix C = random_costs(3, 3, 44);
  Matrix gamma = Matrix::Constant(3, 3, 1.0 / 9.0);
  Matrix star = Matrix::Zero(3, 3);
  star(0, 1) = star(1, 2) = star(2, 0) = 1.0 / 3.0;
  // blend slightly so the restriction stays differentiable at a = 1
  star = 0.9 * star.array() + 0.1 / 9.0;
  const Matrix delta = star - gamma;
  GcgConfig cfg;
  cfg.lambda = 0.3;
  const double ahat = line_search(gamma, delta, wrap(C), cfg, {});

  const auto phi = [&](double a) {
    const Matrix p = gamma + a * delta;
    return (p.array() * C.array()).sum() + cfg.lambda * negentropy(p);
  };
  double grid_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t <= 1000; ++t)
    grid_min = std::min(grid_min, phi(t / 1000.0));
  CHECK(phi(ahat) <= grid_min + 1e-12);
}

TEST_CASE("configuration validation") {
  const Matrix C = random_costs(3, 3, 2);
  GcgConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS_WITH_AS(solve_gcg(uniform(3), uniform(3), wrap(C), cfg),
                       "lambda must be positive", Error);
  cfg.lambda = 1.0;
  cfg.eta = -0.5;
  CHECK_THROWS_WITH_AS(solve_gcg(uniform(3), uniform(3), wrap(C), cfg),
                       "eta must be nonnegative", Error);
  cfg.eta = 0.0;
  cfg.rel_tol = 0.0;
  CHECK_THROWS_WITH_AS(solve_gcg(uniform(3), uniform(3), wrap(C), cfg),
                       "invalid solver options", Error);
  cfg.rel_tol = 1e-5;
  CHECK_THROWS_WITH_AS(solve_gcg(uniform(4), uniform(3), wrap(C), cfg),
                       "cost matrix shape mismatch", Error);

  cfg.regularizer = Regularizer::GroupLasso;
  cfg.eta = 1.0;
  CHECK_THROWS_WITH_AS(solve_gcg(uniform(3), uniform(3), wrap(C), cfg, {}),
                       "regularizer context mismatch", Error);

  cfg.regularizer = Regularizer::Laplacian;
  LaplacianContext lap;
  lap.Xs = Matrix::Zero(3, 1);
  lap.Xt = Matrix::Zero(3, 1);
  lap.Ls = Matrix::Zero(3, 3);
  lap.Lt = Matrix::Zero(3, 3);
  RegContext ctx = lap;
  Vector w(3);
  w << 0.5, 0.25, 0.25;
  const DiscreteMeasure skewed(Matrix::Zero(3, 1), w);
  CHECK_THROWS_WITH_AS(solve_gcg(skewed, uniform(3), wrap(C), cfg, ctx),
                       "uniform marginals required", Error);
}

TEST_CASE("subproblem failure is reported with the outer iteration") {
  const Matrix C = random_costs(4, 4, 6);
  GcgConfig cfg;
  cfg.lambda = 0.05;
  cfg.sinkhorn.max_iters = 1;
  cfg.sinkhorn.tol = 1e-14;
  try {
    solve_gcg(uniform(4), uniform(4), wrap(C), cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    const std::string msg = e.what();
    CHECK(msg.rfind("entropic subproblem failed at outer iteration 0", 0) ==
          0);
    CHECK(e.last_plan().rows() == 4);
  }
}

TEST_CASE("outer iteration cap truncates the trace") {
  const Matrix C = random_costs(4, 4, 30);
  GcgConfig cfg;
  cfg.lambda = 0.2;
  cfg.eta = 1.0;
  cfg.rel_tol = 1e-14;  // never converges by decrease
  cfg.max_outer_iters = 3;
  cfg.regularizer = Regularizer::GroupLasso;
  RegContext ctx = GroupLassoContext{groups_from_labels({0, 1, 0, 1})};
  const auto [g, trace] = solve_gcg(uniform(4), uniform(4), wrap(C), cfg, ctx);
  CHECK(trace.records.size() <= 4);  // initial row + at most 3 steps
  check_trace(trace);
}
