#ifndef OTDA_COST_HPP
#define OTDA_COST_HPP

#include <vector>

#include "otda/types.hpp"

namespace otda {

enum class Metric { SquaredEuclidean, Euclidean, Manhattan };

/// Dense ns x nt ground-cost matrix. Entries are nonnegative; when a label
/// mask has been applied, forbidden pairs hold the finite sentinel
/// large_cost (never IEEE infinity, which would poison the scaling kernels).
struct CostMatrix {
  Matrix values;
  Metric metric = Metric::SquaredEuclidean;
  bool masked = false;
  double large_cost = 0.0;  // sentinel value used for masked entries

  Index rows() const { return values.rows(); }
  Index cols() const { return values.cols(); }
};

/// Pairwise ground costs between the rows of Xs and Xt.
CostMatrix pairwise_cost(const Matrix& Xs, const Matrix& Xt,
                         Metric metric = Metric::SquaredEuclidean);

/// Sentinel used for masked entries: 1e8 * (max finite entry + 1).
double mask_sentinel(const Matrix& costs);

/// Semi-supervised mask: pairs whose known target label differs from the
/// source label are priced at the sentinel; unknown target labels (-1)
/// leave the column untouched. A known target label with no matching
/// source row would starve that column, so it is rejected.
CostMatrix apply_label_mask(const CostMatrix& C, const std::vector<int>& ys,
                            const std::vector<int>& yt_partial);

/// Divides all entries by the max finite entry (optional preconditioning;
/// off by default everywhere, exposed for experimentation).
CostMatrix normalize_costs(const CostMatrix& C);

}  // namespace otda

#endif  // OTDA_COST_HPP
