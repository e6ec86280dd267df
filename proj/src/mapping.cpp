#include "otda/mapping.hpp"

namespace otda {

Matrix barycentric_map(const Coupling& coupling, const Matrix& Xt) {
  const Matrix& plan = coupling.plan;
  if (Xt.rows() != plan.cols()) throw Error("dimension mismatch");
  const Vector row_mass = plan.rowwise().sum();
  if ((row_mass.array() <= 0.0).any()) throw Error("unmapped source sample");
  return row_mass.cwiseInverse().asDiagonal() * (plan * Xt);
}

Matrix inverse_map(const Coupling& coupling, const Matrix& Xs) {
  const Matrix& plan = coupling.plan;
  if (Xs.rows() != plan.rows()) throw Error("dimension mismatch");
  const Vector col_mass = plan.colwise().sum().transpose();
  if ((col_mass.array() <= 0.0).any()) throw Error("unmapped target sample");
  return col_mass.cwiseInverse().asDiagonal() * (plan.transpose() * Xs);
}

WeightedPoints interpolate(const Coupling& coupling, const Matrix& Xs,
                           const Matrix& Xt, double t, Metric metric) {
  const Matrix& plan = coupling.plan;
  if (Xs.rows() != plan.rows() || Xt.rows() != plan.cols() ||
      Xs.cols() != Xt.cols())
    throw Error("dimension mismatch");
  if (!(t >= 0.0 && t <= 1.0)) throw Error("interpolation parameter");
  if (metric != Metric::SquaredEuclidean && t < 1.0)
    throw Error("interpolation requires squared euclidean cost");

  constexpr double kDrop = 1e-15;
  WeightedPoints out;

  // Endpoints: all atoms of a row (resp. column) coincide; merge them.
  if (t == 0.0 || t == 1.0) {
    const Vector mass = t == 0.0
                            ? Vector(plan.rowwise().sum())
                            : Vector(plan.colwise().sum().transpose());
    const Matrix& support = t == 0.0 ? Xs : Xt;
    Index kept = 0;
    for (Index i = 0; i < mass.size(); ++i)
      if (mass[i] >= kDrop) ++kept;
    out.points.resize(kept, support.cols());
    out.masses.resize(kept);
    Index pos = 0;
    for (Index i = 0; i < mass.size(); ++i) {
      if (mass[i] < kDrop) continue;
      out.points.row(pos) = support.row(i);
      out.masses[pos] = mass[i];
      ++pos;
    }
    return out;
  }

  Index kept = 0;
  for (Index i = 0; i < plan.rows(); ++i)
    for (Index j = 0; j < plan.cols(); ++j)
      if (plan(i, j) >= kDrop) ++kept;
  out.points.resize(kept, Xs.cols());
  out.masses.resize(kept);
  Index pos = 0;
  for (Index i = 0; i < plan.rows(); ++i)
    for (Index j = 0; j < plan.cols(); ++j) {
      if (plan(i, j) < kDrop) continue;
      out.points.row(pos) = (1.0 - t) * Xs.row(i) + t * Xt.row(j);
      out.masses[pos] = plan(i, j);
      ++pos;
    }
  return out;
}

}  // namespace otda
