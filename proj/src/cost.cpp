#include "otda/cost.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace otda {

CostMatrix pairwise_cost(const Matrix& Xs, const Matrix& Xt, Metric metric) {
  if (Xs.cols() != Xt.cols()) throw Error("feature dimension mismatch");
  if (Xs.rows() < 1 || Xt.rows() < 1) throw Error("empty measure");
  if (!Xs.allFinite() || !Xt.allFinite()) throw Error("invalid data");

  const Index ns = Xs.rows(), nt = Xt.rows();
  CostMatrix out;
  out.metric = metric;
  out.values.resize(ns, nt);
  for (Index i = 0; i < ns; ++i) {
    for (Index j = 0; j < nt; ++j) {
      const auto diff = Xs.row(i) - Xt.row(j);
      switch (metric) {
        case Metric::SquaredEuclidean:
          out.values(i, j) = diff.squaredNorm();
          break;
        case Metric::Euclidean:
          out.values(i, j) = diff.norm();
          break;
        case Metric::Manhattan:
          out.values(i, j) = diff.cwiseAbs().sum();
          break;
      }
    }
  }
  return out;
}

double mask_sentinel(const Matrix& costs) {
  return 1e8 * (costs.maxCoeff() + 1.0);
}

CostMatrix apply_label_mask(const CostMatrix& C, const std::vector<int>& ys,
                            const std::vector<int>& yt_partial) {
  if (static_cast<Index>(ys.size()) != C.rows())
    throw Error("source label count mismatch");
  if (static_cast<Index>(yt_partial.size()) != C.cols())
    throw Error("target label count mismatch");

  const std::set<int> source_classes(ys.begin(), ys.end());
  for (int label : yt_partial) {
    if (label >= 0 && source_classes.count(label) == 0)
      throw Error("unmatchable target label");
  }

  CostMatrix out = C;
  out.masked = true;
  out.large_cost = mask_sentinel(C.values);
  for (Index j = 0; j < C.cols(); ++j) {
    const int yt = yt_partial[static_cast<size_t>(j)];
    if (yt < 0) continue;  // unknown label: column passes through
    for (Index i = 0; i < C.rows(); ++i) {
      if (ys[static_cast<size_t>(i)] != yt) out.values(i, j) = out.large_cost;
    }
  }
  return out;
}

CostMatrix normalize_costs(const CostMatrix& C) {
  CostMatrix out = C;
  const double scale = C.values.maxCoeff();
  if (scale > 0.0) {
    out.values /= scale;
    if (out.masked) out.large_cost /= scale;
  }
  return out;
}

}  // namespace otda
