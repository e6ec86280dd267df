#ifndef OTDA_SINKHORN_HPP
#define OTDA_SINKHORN_HPP

#include "otda/cost.hpp"
#include "otda/coupling.hpp"
#include "otda/measures.hpp"
#include "otda/types.hpp"

namespace otda {

/// Options for the entropy-regularized solver.
struct SinkhornOptions {
  double lambda = 1.0;     ///< entropic weight, must be > 0
  long max_iters = 10000;  ///< iteration cap
  double tol = 1e-9;       ///< infinity-norm marginal residual at exit
  bool log_domain = false; ///< force the stabilized log-sum-exp path
};

/// Negentropy sum x*log(x) over plan entries, with 0*log(0) = 0.
/// For a coupling of probability measures the value lies in
/// [-log(ns*nt), 0].
double negentropy(const Matrix& plan);

/// Entropy-regularized transport via Sinkhorn-Knopp scaling:
/// plan = diag(u) * exp(-C/lambda) * diag(v) with marginals mu_s, mu_t.
/// Runs the fast linear-domain recursion unless opts.log_domain is set,
/// falling back to log-sum-exp updates automatically if the kernel
/// underflows. Throws ConvergenceError (carrying the last iterate and
/// its residual) when max_iters is exhausted above tol.
Coupling solve_entropic(const DiscreteMeasure& mu_s,
                        const DiscreteMeasure& mu_t, const CostMatrix& C,
                        const SinkhornOptions& opts);

/// Warm-startable variant for outer solvers that call Sinkhorn
/// repeatedly on slowly changing costs: the scaling vectors are read
/// from and written back to u, v (linear-domain parametrization; the
/// stabilized path converts through potentials f = lambda*log u).
/// Vectors of the wrong size or with non-positive entries are reset to
/// ones. Results are deterministic functions of (inputs, u, v).
Coupling solve_entropic_warm(const DiscreteMeasure& mu_s,
                             const DiscreteMeasure& mu_t,
                             const CostMatrix& C,
                             const SinkhornOptions& opts, Vector& u,
                             Vector& v);

/// Linear-domain scaling only. Throws
/// "lambda too small for linear-domain; retry log_domain" when the
/// kernel exp(-C/lambda) degenerates (all-zero row/column or a scaling
/// vector leaves the representable range).
Coupling sinkhorn_linear(const DiscreteMeasure& mu_s,
                         const DiscreteMeasure& mu_t, const CostMatrix& C,
                         const SinkhornOptions& opts);

/// Log-domain potentials with log-sum-exp updates; slower but stable
/// for small lambda or large costs.
Coupling sinkhorn_log(const DiscreteMeasure& mu_s,
                      const DiscreteMeasure& mu_t, const CostMatrix& C,
                      const SinkhornOptions& opts);

}  // namespace otda

#endif  // OTDA_SINKHORN_HPP
