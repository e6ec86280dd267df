#include "otda/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace otda {

namespace {

void check_partition(const ClassGroups& groups, Index ns) {
  std::vector<char> seen(ns, 0);
  Index count = 0;
  for (const auto& [cls, idx] : groups.groups)
    for (Index i : idx) {
      if (i < 0 || i >= ns || seen[i]) throw Error("invalid class groups");
      seen[i] = 1;
      ++count;
    }
  if (count != ns) throw Error("invalid class groups");
}

Matrix knn_union_graph(const Matrix& X, Index k) {
  const Index n = X.rows();
  if (n == 0) throw Error("empty measure");
  if (k < 1 || k >= n) throw Error("neighborhood too large");

  Matrix D(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      D(i, j) = (X.row(i) - X.row(j)).squaredNorm();

  Matrix S = Matrix::Zero(n, n);
  std::vector<Index> order;
  for (Index i = 0; i < n; ++i) {
    order.clear();
    for (Index j = 0; j < n; ++j)
      if (j != i) order.push_back(j);
    // ties fall back to the smaller index for determinism
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Index a, Index b) {
                        if (D(i, a) != D(i, b)) return D(i, a) < D(i, b);
                        return a < b;
                      });
    for (Index t = 0; t < k; ++t) S(i, order[t]) = 1.0;
  }
  S = S.cwiseMax(S.transpose().eval());  // union symmetrization
  return S;
}

SimilarityGraph finish_graph(Matrix S) {
  SimilarityGraph g;
  g.laplacian = Matrix(S.rowwise().sum().asDiagonal()) - S;
  g.weights = std::move(S);
  return g;
}

}  // namespace

ClassGroups groups_from_labels(const std::vector<int>& y) {
  std::map<int, std::vector<Index>> by_class;
  for (size_t i = 0; i < y.size(); ++i)
    by_class[y[i]].push_back(static_cast<Index>(i));
  ClassGroups out;
  out.groups.assign(by_class.begin(), by_class.end());
  return out;
}

RegValueGrad group_lasso(const Matrix& plan, const ClassGroups& groups) {
  check_partition(groups, plan.rows());
  RegValueGrad out;
  out.gradient = Matrix::Zero(plan.rows(), plan.cols());
  for (const auto& [cls, idx] : groups.groups) {
    for (Index j = 0; j < plan.cols(); ++j) {
      double sq = 0.0;
      for (Index i : idx) sq += plan(i, j) * plan(i, j);
      const double norm = std::sqrt(sq);
      if (!(norm > 0.0)) throw Error("nondifferentiable point");
      out.value += norm;
      for (Index i : idx) out.gradient(i, j) = plan(i, j) / norm;
    }
  }
  return out;
}

RegValueGrad laplacian_reg(const Matrix& plan, const Matrix& Xs,
                           const Matrix& Xt, const Matrix& Ls,
                           const Matrix* Lt, double alpha, double ns_scale) {
  const Index ns = plan.rows(), nt = plan.cols();
  if (alpha < 0.0 || alpha > 1.0) throw Error("alpha out of range");
  if (alpha > 0.0 && Lt == nullptr) throw Error("target graph required");
  if (Xs.rows() != ns || Xt.rows() != nt || Ls.rows() != ns ||
      Ls.cols() != ns || (Lt != nullptr && (Lt->rows() != nt ||
                                            Lt->cols() != nt)))
    throw Error("dimension mismatch");

  RegValueGrad out;
  out.gradient = Matrix::Zero(ns, nt);
  if (alpha < 1.0) {
    const Matrix A = plan * Xt;  // transported coordinates, ns x d
    out.value += ns_scale * (1.0 - alpha) * (A.transpose() * (Ls * A)).trace();
    out.gradient.noalias() +=
        (ns_scale * (1.0 - alpha)) * ((Ls + Ls.transpose()) * A) *
        Xt.transpose();
  }
  if (alpha > 0.0) {
    const Matrix B = plan.transpose() * Xs;  // nt x d
    out.value += ns_scale * alpha * (B.transpose() * (*Lt * B)).trace();
    out.gradient.noalias() += (ns_scale * alpha) * Xs *
                              (B.transpose() * (*Lt + Lt->transpose()));
  }
  return out;
}

SimilarityGraph build_source_graph(const Matrix& Xs,
                                   const std::vector<int>& ys, Index k) {
  if (static_cast<Index>(ys.size()) != Xs.rows())
    throw Error("label count mismatch");
  Matrix S = knn_union_graph(Xs, k);
  for (Index i = 0; i < S.rows(); ++i)
    for (Index j = 0; j < S.cols(); ++j)
      if (ys[i] != ys[j]) S(i, j) = 0.0;  // prune cross-class edges
  return finish_graph(std::move(S));
}

SimilarityGraph build_target_graph(const Matrix& Xt, Index k) {
  return finish_graph(knn_union_graph(Xt, k));
}

}  // namespace otda
