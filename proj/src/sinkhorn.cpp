#include "otda/sinkhorn.hpp"

#include <cmath>
#include <limits>

namespace otda {

namespace {

void check_inputs(const DiscreteMeasure& mu_s, const DiscreteMeasure& mu_t,
                  const CostMatrix& C, const SinkhornOptions& opts) {
  if (!(opts.lambda > 0.0)) throw Error("lambda must be positive");
  if (!(opts.tol > 0.0) || opts.max_iters < 1)
    throw Error("invalid solver options");
  if (C.rows() != mu_s.size() || C.cols() != mu_t.size())
    throw Error("cost matrix shape mismatch");
}

Coupling make_coupling(Matrix plan, const Vector& a, const Vector& b) {
  Coupling out;
  out.plan = std::move(plan);
  out.source_marginal = a;
  out.target_marginal = b;
  return out;
}

// Classic scaling recursion on K = exp(-C/lambda), continuing from the
// supplied u, v. Column sums are exact after each v-update, so the
// residual lives in the rows; it is checked every iteration, reusing
// K*v for the next u-update. Sets `underflow` instead of converging
// when K degenerates.
Coupling linear_impl(const Vector& a, const Vector& b, const CostMatrix& C,
                     const SinkhornOptions& opts, Vector& u, Vector& v,
                     bool& underflow) {
  underflow = false;
  // scalar std::exp so oversized exponents underflow to an exact zero
  // (the vectorized path clamps them to a subnormal instead, which would
  // hide a degenerate kernel from the checks below)
  const Matrix K = (-C.values / opts.lambda)
                       .array()
                       .unaryExpr([](double x) { return std::exp(x); })
                       .matrix();
  Vector Kv = K * v;
  double residual = std::numeric_limits<double>::infinity();
  for (long it = 1; it <= opts.max_iters; ++it) {
    if ((Kv.array() <= 0.0).any()) {
      underflow = true;
      return {};
    }
    u = a.cwiseQuotient(Kv);
    const Vector Ktu = K.transpose() * u;
    if ((Ktu.array() <= 0.0).any()) {
      underflow = true;
      return {};
    }
    v = b.cwiseQuotient(Ktu);
    if (!u.allFinite() || !v.allFinite()) {
      underflow = true;
      return {};
    }
    Kv = K * v;
    residual = (u.cwiseProduct(Kv) - a).cwiseAbs().maxCoeff();
    if (residual <= opts.tol)
      return make_coupling(u.asDiagonal() * K * v.asDiagonal(), a, b);
  }
  throw ConvergenceError("entropic solver iteration cap reached",
                         u.asDiagonal() * K * v.asDiagonal(), residual,
                         opts.max_iters);
}

// Log-sum-exp along rows with max subtraction; tolerates -inf entries
// (they contribute nothing).
Vector lse_rows(const Matrix& M) {
  const Vector m = M.rowwise().maxCoeff();
  Vector out(M.rows());
  for (Index i = 0; i < M.rows(); ++i) {
    if (!std::isfinite(m[i])) {
      out[i] = m[i];
      continue;
    }
    out[i] = m[i] + std::log((M.row(i).array() - m[i]).exp().sum());
  }
  return out;
}

// Stabilized potentials f, g with plan = exp((f + g - C)/lambda),
// continuing from the supplied potentials. Both updates are written in
// closed form (not incrementally), so zero-mass atoms simply pin their
// potential at -inf.
Coupling log_impl(const Vector& a, const Vector& b, const CostMatrix& C,
                  const SinkhornOptions& opts, Vector& f, Vector& g) {
  const double lam = opts.lambda;
  const Index ns = a.size(), nt = b.size();
  const Vector log_a = a.array().log().matrix();
  const Vector log_b = b.array().log().matrix();
  Matrix scaled(ns, nt);
  Matrix plan(ns, nt);
  double residual = std::numeric_limits<double>::infinity();
  for (long it = 1; it <= opts.max_iters; ++it) {
    scaled = ((-C.values).rowwise() + g.transpose()) / lam;
    f = lam * (log_a - lse_rows(scaled));
    scaled = ((-C.values).colwise() + f).transpose() / lam;
    g = lam * (log_b - lse_rows(scaled));
    plan = ((((-C.values).colwise() + f).rowwise() + g.transpose()) / lam)
               .array()
               .exp()
               .matrix();
    residual = (plan.rowwise().sum() - a).cwiseAbs().maxCoeff();
    if (residual <= opts.tol) return make_coupling(std::move(plan), a, b);
  }
  throw ConvergenceError("entropic solver iteration cap reached",
                         std::move(plan), residual, opts.max_iters);
}

bool usable_scaling(const Vector& w, Index n) {
  return w.size() == n && w.allFinite() && (w.array() > 0.0).all();
}

}  // namespace

double negentropy(const Matrix& plan) {
  double s = 0.0;
  for (Index j = 0; j < plan.cols(); ++j)
    for (Index i = 0; i < plan.rows(); ++i) {
      const double x = plan(i, j);
      if (x > 0.0) s += x * std::log(x);
    }
  return s;
}

Coupling solve_entropic(const DiscreteMeasure& mu_s,
                        const DiscreteMeasure& mu_t, const CostMatrix& C,
                        const SinkhornOptions& opts) {
  Vector u = Vector::Ones(mu_s.size());
  Vector v = Vector::Ones(mu_t.size());
  return solve_entropic_warm(mu_s, mu_t, C, opts, u, v);
}

Coupling solve_entropic_warm(const DiscreteMeasure& mu_s,
                             const DiscreteMeasure& mu_t,
                             const CostMatrix& C,
                             const SinkhornOptions& opts, Vector& u,
                             Vector& v) {
  check_inputs(mu_s, mu_t, C, opts);
  const Vector& a = mu_s.weights();
  const Vector& b = mu_t.weights();
  if (!usable_scaling(u, mu_s.size())) u = Vector::Ones(mu_s.size());
  if (!usable_scaling(v, mu_t.size())) v = Vector::Ones(mu_t.size());

  if (opts.log_domain) {
    Vector f = (opts.lambda * u.array().log()).matrix();
    Vector g = (opts.lambda * v.array().log()).matrix();
    Coupling out = log_impl(a, b, C, opts, f, g);
    u = (f / opts.lambda).array().exp().matrix();
    v = (g / opts.lambda).array().exp().matrix();
    return out;
  }

  const Vector u0 = u, v0 = v;
  bool underflow = false;
  Coupling out = linear_impl(a, b, C, opts, u, v, underflow);
  if (!underflow) return out;

  // Kernel degenerated; redo with the stabilized path, seeded from the
  // scalings this call started with.
  Vector f = (opts.lambda * u0.array().log()).matrix();
  Vector g = (opts.lambda * v0.array().log()).matrix();
  out = log_impl(a, b, C, opts, f, g);
  u = (f / opts.lambda).array().exp().matrix();
  v = (g / opts.lambda).array().exp().matrix();
  return out;
}

Coupling sinkhorn_linear(const DiscreteMeasure& mu_s,
                         const DiscreteMeasure& mu_t, const CostMatrix& C,
                         const SinkhornOptions& opts) {
  check_inputs(mu_s, mu_t, C, opts);
  Vector u = Vector::Ones(mu_s.size());
  Vector v = Vector::Ones(mu_t.size());
  bool underflow = false;
  Coupling out =
      linear_impl(mu_s.weights(), mu_t.weights(), C, opts, u, v, underflow);
  if (underflow)
    throw Error("lambda too small for linear-domain; retry log_domain");
  return out;
}

Coupling sinkhorn_log(const DiscreteMeasure& mu_s,
                      const DiscreteMeasure& mu_t, const CostMatrix& C,
                      const SinkhornOptions& opts) {
  check_inputs(mu_s, mu_t, C, opts);
  Vector f = Vector::Zero(mu_s.size());
  Vector g = Vector::Zero(mu_t.size());
  return log_impl(mu_s.weights(), mu_t.weights(), C, opts, f, g);
}

}  // namespace otda
