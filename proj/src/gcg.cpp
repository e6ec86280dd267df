#include "otda/gcg.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace otda {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

double frobenius(const Matrix& A, const Matrix& B) {
  return A.cwiseProduct(B).sum();
}

double marginal_residual(const Matrix& plan, const Vector& a,
                         const Vector& b) {
  const double row = (plan.rowwise().sum() - a).cwiseAbs().maxCoeff();
  const double col =
      (plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
  return std::max(row, col);
}

RegValueGrad eval_reg(const Matrix& plan, const GcgConfig& cfg,
                      const RegContext& ctx) {
  switch (cfg.regularizer) {
    case Regularizer::None: {
      RegValueGrad out;
      out.gradient = Matrix::Zero(plan.rows(), plan.cols());
      return out;
    }
    case Regularizer::GroupLasso: {
      const auto* c = std::get_if<GroupLassoContext>(&ctx);
      if (c == nullptr) throw Error("regularizer context mismatch");
      return group_lasso(plan, c->groups);
    }
    case Regularizer::Laplacian: {
      const auto* c = std::get_if<LaplacianContext>(&ctx);
      if (c == nullptr) throw Error("regularizer context mismatch");
      return laplacian_reg(plan, c->Xs, c->Xt, c->Ls,
                           c->Lt ? &*c->Lt : nullptr, c->alpha, c->ns_scale);
    }
  }
  throw Error("regularizer context mismatch");
}

// 1-D restriction of the composite objective along
// plan(alpha) = gamma + alpha*delta. The class-regularizer part is
// reduced to scalar coefficients up front so each evaluation is cheap;
// only the entropy term needs a full pass over the matrix.
class LineRestriction {
 public:
  LineRestriction(const Matrix& gamma, const Matrix& delta,
                  const CostMatrix& C, const GcgConfig& cfg,
                  const RegContext& ctx)
      : gamma_(gamma),
        delta_(delta),
        lambda_(cfg.lambda),
        eta_(cfg.eta),
        lin0_(frobenius(gamma, C.values)),
        lin1_(frobenius(delta, C.values)),
        delta_sum_(delta.sum()) {
    if (eta_ > 0.0 && cfg.regularizer == Regularizer::GroupLasso) {
      const auto* c = std::get_if<GroupLassoContext>(&ctx);
      if (c == nullptr) throw Error("regularizer context mismatch");
      const Index nt = gamma.cols();
      for (const auto& [cls, idx] : c->groups.groups)
        for (Index j = 0; j < nt; ++j) {
          double p = 0.0, q = 0.0, r = 0.0;
          for (Index i : idx) {
            p += gamma(i, j) * gamma(i, j);
            q += gamma(i, j) * delta(i, j);
            r += delta(i, j) * delta(i, j);
          }
          p_.push_back(p);
          q_.push_back(q);
          r_.push_back(r);
        }
      has_group_ = true;
    } else if (eta_ > 0.0 && cfg.regularizer == Regularizer::Laplacian) {
      // homogeneous quadratic: reg(alpha) = v0 + d0*alpha + vd*alpha^2
      const RegValueGrad at_gamma = eval_reg(gamma, cfg, ctx);
      v0_ = at_gamma.value;
      d0_ = frobenius(at_gamma.gradient, delta);
      vd_ = eval_reg(delta, cfg, ctx).value;
      has_lap_ = true;
    }
  }

  double value(double a) const {
    const auto x = (gamma_.array() + a * delta_.array()).eval();
    double val = lin0_ + a * lin1_;
    if (lambda_ > 0.0) val += lambda_ * (x * x.max(kTiny).log()).sum();
    if (has_group_) {
      double reg = 0.0;
      for (size_t t = 0; t < p_.size(); ++t)
        reg += std::sqrt(std::max(p_[t] + 2.0 * a * q_[t] + a * a * r_[t],
                                  0.0));
      val += eta_ * reg;
    } else if (has_lap_) {
      val += eta_ * (v0_ + a * d0_ + a * a * vd_);
    }
    return val;
  }

  double derivative(double a) const {
    double d = lin1_;
    if (lambda_ > 0.0) {
      const auto x = (gamma_.array() + a * delta_.array()).eval();
      d += lambda_ *
           (delta_sum_ + (delta_.array() * x.max(kTiny).log()).sum());
    }
    if (has_group_) {
      double reg = 0.0;
      for (size_t t = 0; t < p_.size(); ++t) {
        const double sq = p_[t] + 2.0 * a * q_[t] + a * a * r_[t];
        const double norm = std::sqrt(std::max(sq, 0.0));
        if (norm > 0.0)
          reg += (q_[t] + a * r_[t]) / norm;
        else if (a >= 1.0)  // block vanishing exactly at alpha = 1
          reg -= std::sqrt(p_[t]);
      }
      d += eta_ * reg;
    } else if (has_lap_) {
      d += eta_ * (d0_ + 2.0 * a * vd_);
    }
    return d;
  }

 private:
  const Matrix& gamma_;
  const Matrix& delta_;
  double lambda_, eta_;
  double lin0_, lin1_, delta_sum_;
  std::vector<double> p_, q_, r_;
  bool has_group_ = false;
  double v0_ = 0.0, d0_ = 0.0, vd_ = 0.0;
  bool has_lap_ = false;
};

}  // namespace

double line_search(const Matrix& gamma_k, const Matrix& delta,
                   const CostMatrix& C, const GcgConfig& cfg,
                   const RegContext& ctx) {
  if (gamma_k.rows() != delta.rows() || gamma_k.cols() != delta.cols() ||
      gamma_k.rows() != C.rows() || gamma_k.cols() != C.cols())
    throw Error("dimension mismatch");
  if (cfg.lambda < 0.0 || cfg.eta < 0.0) throw Error("invalid solver options");
  if (delta.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  const LineRestriction phi(gamma_k, delta, C, cfg, ctx);
  const auto deriv = [&](double a) {
    const double d = phi.derivative(a);
    if (std::isnan(d)) throw Error("line search domain");
    return d;
  };

  if (deriv(0.0) >= 0.0) return 0.0;  // convex: left endpoint optimal
  if (deriv(1.0) <= 0.0) return 1.0;  // decreasing throughout

  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (deriv(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double ahat = 0.5 * (lo + hi);

  // Safeguard: never return a point worse than the endpoints.
  const double f0 = phi.value(0.0);
  const double f1 = phi.value(1.0);
  const double fh = phi.value(ahat);
  if (std::isnan(f0) || std::isnan(f1) || std::isnan(fh))
    throw Error("line search domain");
  if (fh <= f0 && fh <= f1) return ahat;
  return f1 < f0 ? 1.0 : 0.0;
}

std::pair<Coupling, SolveTrace> solve_gcg(const DiscreteMeasure& mu_s,
                                          const DiscreteMeasure& mu_t,
                                          const CostMatrix& C,
                                          const GcgConfig& cfg,
                                          const RegContext& ctx) {
  if (!(cfg.lambda > 0.0)) throw Error("lambda must be positive");
  if (cfg.eta < 0.0) throw Error("eta must be nonnegative");
  if (!(cfg.rel_tol > 0.0) || cfg.max_outer_iters < 1)
    throw Error("invalid solver options");
  if (C.rows() != mu_s.size() || C.cols() != mu_t.size())
    throw Error("cost matrix shape mismatch");
  if (cfg.regularizer == Regularizer::Laplacian) {
    const auto uniform = [](const Vector& w) {
      return (w.array() - 1.0 / static_cast<double>(w.size()))
                 .abs()
                 .maxCoeff() <= 1e-12;
    };
    if (!uniform(mu_s.weights()) || !uniform(mu_t.weights()))
      throw Error("uniform marginals required");
  }

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&start]() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  };

  const Vector& a = mu_s.weights();
  const Vector& b = mu_t.weights();
  Matrix gamma = a * b.transpose();  // feasible, strictly positive
  RegValueGrad reg = eval_reg(gamma, cfg, ctx);
  double F = frobenius(gamma, C.values) + cfg.lambda * negentropy(gamma) +
             cfg.eta * reg.value;

  SolveTrace trace;
  trace.records.push_back({F, 0.0, marginal_residual(gamma, a, b),
                           elapsed_ms()});

  SinkhornOptions sub = cfg.sinkhorn;
  sub.lambda = cfg.lambda;
  Vector warm_u = Vector::Ones(mu_s.size());
  Vector warm_v = Vector::Ones(mu_t.size());
  CostMatrix shifted = C;

  for (long k = 0; k < cfg.max_outer_iters; ++k) {
    shifted.values = C.values + cfg.eta * reg.gradient;
    Coupling star;
    try {
      star = solve_entropic_warm(mu_s, mu_t, shifted, sub, warm_u, warm_v);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("entropic subproblem failed at outer iteration " +
                                 std::to_string(k) + ": " + e.what(),
                             e.last_plan(), e.residual(), e.iterations());
    }

    const Matrix delta = star.plan - gamma;
    const double alpha = line_search(gamma, delta, C, cfg, ctx);

    double F_new = F;
    if (alpha > 0.0) {
      Matrix candidate =
          alpha == 1.0 ? star.plan : Matrix(gamma + alpha * delta);
      RegValueGrad reg_new = eval_reg(candidate, cfg, ctx);
      F_new = frobenius(candidate, C.values) +
              cfg.lambda * negentropy(candidate) + cfg.eta * reg_new.value;
      if (F_new > F + 1e-12 * std::max(1.0, std::abs(F)))
        throw ConvergenceError("line search found no decrease at outer "
                               "iteration " +
                                   std::to_string(k),
                               gamma, F_new - F, k);
      gamma = std::move(candidate);
      reg = std::move(reg_new);
    }

    trace.records.push_back({F_new, alpha, marginal_residual(gamma, a, b),
                             elapsed_ms()});
    const bool stalled = alpha == 0.0;
    const bool converged =
        std::abs(F - F_new) / std::max(std::abs(F), 1.0) < cfg.rel_tol;
    F = F_new;
    if (stalled || converged) break;
  }

  Coupling out;
  out.plan = std::move(gamma);
  out.source_marginal = a;
  out.target_marginal = b;
  return {std::move(out), std::move(trace)};
}

}  // namespace otda
