#ifndef OTDA_MEASURES_HPP
#define OTDA_MEASURES_HPP

#include "otda/types.hpp"

namespace otda {

/// Empirical distribution: n weighted points in R^d. Rows are samples.
/// Weights live on the probability simplex (nonnegative, sum 1 within 1e-12).
/// Immutable after construction; safe to share across threads.
class DiscreteMeasure {
 public:
  /// Validates the simplex invariants; throws Error on violation.
  DiscreteMeasure(Matrix points, Vector weights);

  Index size() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }

 private:
  Matrix points_;
  Vector weights_;
};

/// Measure with equal mass 1/n on every point.
DiscreteMeasure uniform_measure(Matrix points);

/// Projects a nonnegative mass vector onto the simplex by proportional
/// scaling. The output sums to 1 within 1e-12.
Vector normalize_weights(const Vector& raw);

}  // namespace otda

#endif  // OTDA_MEASURES_HPP
