#ifndef OTDA_GCG_HPP
#define OTDA_GCG_HPP

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "otda/cost.hpp"
#include "otda/coupling.hpp"
#include "otda/measures.hpp"
#include "otda/regularizers.hpp"
#include "otda/sinkhorn.hpp"
#include "otda/types.hpp"

namespace otda {

/// Class-based regularizer attached to the composite objective.
enum class Regularizer { None, GroupLasso, Laplacian };

/// Controls for the generalized conditional gradient solver of
///   min over couplings of <plan, C> + lambda*negentropy + eta*reg.
struct GcgConfig {
  double lambda = 1.0;        ///< entropy weight, > 0
  double eta = 0.0;           ///< class-regularizer weight, >= 0
  long max_outer_iters = 50;  ///< outer iteration cap
  double rel_tol = 1e-5;      ///< relative objective-decrease stop
  /// Subproblem controls. The lambda field here is ignored; the outer
  /// lambda is used so the entropy term matches the objective.
  SinkhornOptions sinkhorn{};
  Regularizer regularizer = Regularizer::None;
};

/// Inputs the group-lasso penalty needs beyond the plan itself.
struct GroupLassoContext {
  ClassGroups groups;
};

/// Inputs the Laplacian penalty needs beyond the plan itself.
struct LaplacianContext {
  Matrix Xs;                  ///< source samples, ns x d
  Matrix Xt;                  ///< target samples, nt x d
  Matrix Ls;                  ///< source-graph Laplacian, ns x ns
  std::optional<Matrix> Lt;   ///< target-graph Laplacian, required iff alpha > 0
  double alpha = 0.5;         ///< source/target trade-off in [0,1]
  double ns_scale = 1.0;      ///< overall scale (absorbed by eta)
};

using RegContext =
    std::variant<std::monostate, GroupLassoContext, LaplacianContext>;

/// One outer-iteration record (the first row describes the initial
/// plan, before any step).
struct IterationRecord {
  double objective;  ///< composite objective after the step
  double step;       ///< accepted step size in [0,1]
  double residual;   ///< marginal residual of the iterate
  double wall_ms;    ///< elapsed time since solve start
};

struct SolveTrace {
  std::vector<IterationRecord> records;
};

/// Exact minimization of the composite objective along the segment
/// plan = gamma_k + alpha*delta, alpha in [0,1]: derivative bisection
/// on the convex restriction, safeguarded so the returned point is
/// never worse than alpha = 0. Accepts lambda == 0 (entropy disabled).
/// Throws "line search domain" if the restriction evaluates to NaN.
double line_search(const Matrix& gamma_k, const Matrix& delta,
                   const CostMatrix& C, const GcgConfig& cfg,
                   const RegContext& ctx);

/// Generalized conditional gradient (partial linearization): at each
/// outer iteration the class regularizer is linearized at the current
/// plan, the entropic subproblem with shifted costs
/// C + eta*grad(reg) is solved by Sinkhorn scaling, and the convex
/// combination with the optimal step is taken. The initial plan is the
/// outer product of the marginals (feasible, strictly positive,
/// maximum entropy). The objective trace is non-increasing.
std::pair<Coupling, SolveTrace> solve_gcg(const DiscreteMeasure& mu_s,
                                          const DiscreteMeasure& mu_t,
                                          const CostMatrix& C,
                                          const GcgConfig& cfg,
                                          const RegContext& ctx = {});

}  // namespace otda

#endif  // OTDA_GCG_HPP
