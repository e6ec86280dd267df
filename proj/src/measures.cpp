#include "otda/measures.hpp"

#include <cmath>

namespace otda {

namespace {

void check_points(const Matrix& points) {
  if (points.rows() < 1 || points.cols() < 1) throw Error("empty measure");
  if (!points.allFinite()) throw Error("invalid data");
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  check_points(points_);
  if (weights_.size() != points_.rows())
    throw Error("weight count does not match point count");
  if (!weights_.allFinite()) throw Error("invalid data");
  if (weights_.minCoeff() < 0.0) throw Error("negative mass");
  if (std::abs(weights_.sum() - 1.0) > 1e-12)
    throw Error("weights must sum to 1");
}

DiscreteMeasure uniform_measure(Matrix points) {
  check_points(points);
  const Index n = points.rows();
  return DiscreteMeasure(std::move(points),
                         Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

Vector normalize_weights(const Vector& raw) {
  if (raw.size() == 0) throw Error("empty measure");
  if (!raw.allFinite()) throw Error("invalid data");
  if (raw.minCoeff() < 0.0) throw Error("negative mass");
  const double total = raw.sum();
  if (total <= 0.0) throw Error("degenerate mass");
  Vector w = raw / total;
  // Absorb residual rounding into the largest atom so the sum is exact.
  Index imax;
  w.maxCoeff(&imax);
  w[imax] += 1.0 - w.sum();
  return w;
}

}  // namespace otda
