#ifndef OTDA_COUPLING_HPP
#define OTDA_COUPLING_HPP

#include "otda/types.hpp"

namespace otda {

/// Transportation plan between two discrete measures: a nonnegative
/// ns x nt matrix whose row sums match the source marginal and whose
/// column sums match the target marginal (within 1e-7).
struct Coupling {
  Matrix plan;
  Vector source_marginal;
  Vector target_marginal;

  /// Infinity-norm violation of both marginal constraints.
  double marginal_residual() const {
    const double r = (plan.rowwise().sum() - source_marginal)
                         .cwiseAbs()
                         .maxCoeff();
    const double c = (plan.colwise().sum().transpose() - target_marginal)
                         .cwiseAbs()
                         .maxCoeff();
    return std::max(r, c);
  }

  /// Frobenius inner product with a cost matrix: the transport cost.
  double transport_cost(const Matrix& costs) const {
    return (plan.array() * costs.array()).sum();
  }
};

}  // namespace otda

#endif  // OTDA_COUPLING_HPP
