#ifndef OTDA_EXACT_OT_HPP
#define OTDA_EXACT_OT_HPP

#include <utility>
#include <vector>

#include "otda/cost.hpp"
#include "otda/coupling.hpp"
#include "otda/measures.hpp"

namespace otda {

/// Solves the discrete transportation LP
///     min <plan, C>  s.t. plan >= 0, row sums = mu_s, column sums = mu_t
/// with a network simplex on the bipartite transportation graph.
/// The returned plan is an optimal basic solution with at most
/// ns + nt - 1 nonzero entries.
///
/// Throws ConvergenceError (carrying the best feasible plan found and a
/// gap estimate) if the pivot cap is reached. max_pivots <= 0 picks a
/// size-dependent default.
Coupling solve_exact(const DiscreteMeasure& mu_s, const DiscreteMeasure& mu_t,
                     const CostMatrix& C, long max_pivots = 0);

/// Test oracle for the equal-size uniform case: exhaustive minimum over
/// all n! assignments of sum_i C(i, perm[i]). Ties resolve to the
/// lexicographically smallest permutation. Capped at n <= 8.
std::pair<std::vector<Index>, double> brute_force_assignment(
    const CostMatrix& C);

}  // namespace otda

#endif  // OTDA_EXACT_OT_HPP
