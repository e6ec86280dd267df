#ifndef OTDA_REGULARIZERS_HPP
#define OTDA_REGULARIZERS_HPP

#include <utility>
#include <vector>

#include "otda/types.hpp"

namespace otda {

/// Partition of the source rows {0..ns-1} into class-index groups.
struct ClassGroups {
  /// (class id, row indices of that class), one entry per class.
  std::vector<std::pair<int, std::vector<Index>>> groups;
};

/// Builds groups from integer labels, one group per distinct label,
/// ordered by ascending label.
ClassGroups groups_from_labels(const std::vector<int>& y);

/// Similarity graph with its combinatorial Laplacian
/// L = diag(S*1) - S. S is symmetric, nonnegative, zero-diagonal.
struct SimilarityGraph {
  Matrix weights;
  Matrix laplacian;
};

/// Value and coupling-gradient of a regularizer.
struct RegValueGrad {
  double value = 0.0;
  Matrix gradient;
};

/// Group-lasso penalty: sum over target columns and source classes of
/// the Euclidean norm of the class-restricted column block.
/// gradient(i,j) = plan(i,j) / ||block containing (i,j)||. Requires a
/// strictly positive block norm wherever a group touches the plan;
/// throws "nondifferentiable point" otherwise.
RegValueGrad group_lasso(const Matrix& plan, const ClassGroups& groups);

/// Graph-Laplacian displacement penalty in the uniform-marginal form:
///   value = ns_scale * [ (1-alpha)*Tr(Xt' plan' Ls plan Xt)
///                      + alpha   *Tr(Xs' plan  Lt plan' Xs) ]
/// with the matching gradient
///   ns_scale * [ (1-alpha)*(Ls+Ls')*plan*Xt*Xt'
///              + alpha    *Xs*Xs'*plan*(Lt+Lt') ].
/// Lt may be null only when alpha == 0.
RegValueGrad laplacian_reg(const Matrix& plan, const Matrix& Xs,
                           const Matrix& Xt, const Matrix& Ls,
                           const Matrix* Lt, double alpha,
                           double ns_scale = 1.0);

/// Binary k-nearest-neighbor graph, symmetrized by union (an edge
/// survives if either endpoint selects the other), then pruned of
/// edges joining different classes. Distance ties break toward the
/// smaller sample index. Throws "neighborhood too large" when k >= n.
SimilarityGraph build_source_graph(const Matrix& Xs,
                                   const std::vector<int>& ys, Index k);

/// Same construction without class pruning (labels unavailable).
SimilarityGraph build_target_graph(const Matrix& Xt, Index k);

}  // namespace otda

#endif  // OTDA_REGULARIZERS_HPP
