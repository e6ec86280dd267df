#ifndef OTDA_MAPPING_HPP
#define OTDA_MAPPING_HPP

#include "otda/cost.hpp"
#include "otda/coupling.hpp"
#include "otda/types.hpp"

namespace otda {

/// Discrete weighted point set (atoms of an interpolated measure).
struct WeightedPoints {
  Matrix points;  ///< one atom per row
  Vector masses;  ///< nonnegative, sums to the plan's total mass
};

/// Barycentric projection of the source atoms onto the target domain:
/// row i is the plan-weighted mean of the target samples,
///   out.row(i) = plan.row(i) * Xt / row_sum(i).
/// Under a uniform source marginal this reduces to ns * plan * Xt.
/// Throws "unmapped source sample" if a plan row carries no mass.
Matrix barycentric_map(const Coupling& coupling, const Matrix& Xt);

/// Same projection through the transposed plan: maps target atoms into
/// the source domain. Throws "unmapped target sample" on a zero
/// column.
Matrix inverse_map(const Coupling& coupling, const Matrix& Xs);

/// Displacement interpolation between the coupled measures: one atom
/// of mass plan(i,j) at (1-t)*Xs.row(i) + t*Xt.row(j). Atoms lighter
/// than 1e-15 are dropped to bound the output size; at the endpoints
/// coincident atoms are merged, so t=0 returns the source support with
/// the row sums and t=1 the target support with the column sums.
/// The straight-line displacement is only meaningful for the squared
/// Euclidean ground cost; other metrics are refused for t < 1 (t = 1
/// is plain barycentric reweighting and stays available).
WeightedPoints interpolate(const Coupling& coupling, const Matrix& Xs,
                           const Matrix& Xt, double t,
                           Metric metric = Metric::SquaredEuclidean);

}  // namespace otda

#endif  // OTDA_MAPPING_HPP
