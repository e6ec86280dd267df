#include "otda/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace otda {

namespace {

// Spanning-tree basis of the bipartite transportation graph.
// Source i is node i, sink j is node ns + j. The basis always holds
// exactly ns + nt - 1 arcs.
struct Basis {
  Index ns, nt;
  std::vector<Index> arc_i, arc_j;
  std::vector<double> flow;
  std::vector<std::vector<int>> adj;  // node -> incident basic arc ids

  Index nodes() const { return ns + nt; }

  void add_arc(int slot, Index i, Index j, double f) {
    arc_i[slot] = i;
    arc_j[slot] = j;
    flow[slot] = f;
    adj[i].push_back(slot);
    adj[ns + j].push_back(slot);
  }

  void remove_arc(int slot) {
    auto drop = [&](Index node) {
      auto& lst = adj[node];
      lst.erase(std::find(lst.begin(), lst.end(), slot));
    };
    drop(arc_i[slot]);
    drop(ns + arc_j[slot]);
  }

  Index other_end(int slot, Index node) const {
    return node == arc_i[slot] ? ns + arc_j[slot] : arc_i[slot];
  }
};

// Northwest-corner rule: a basic feasible start with ns + nt - 1 arcs
// (zero-flow arcs appear on degenerate ties).
Basis northwest_corner(const Vector& a, const Vector& b) {
  const Index ns = a.size(), nt = b.size();
  Basis basis;
  basis.ns = ns;
  basis.nt = nt;
  const Index n_arcs = ns + nt - 1;
  basis.arc_i.resize(n_arcs);
  basis.arc_j.resize(n_arcs);
  basis.flow.resize(n_arcs);
  basis.adj.resize(ns + nt);

  Index i = 0, j = 0;
  double rem_a = a[0], rem_b = b[0];
  for (int slot = 0; slot < n_arcs; ++slot) {
    const double f = std::max(std::min(rem_a, rem_b), 0.0);
    basis.add_arc(slot, i, j, f);
    rem_a -= f;
    rem_b -= f;
    const bool can_i = i < ns - 1, can_j = j < nt - 1;
    if (!can_i && !can_j) break;
    if (can_i && (rem_a <= rem_b || !can_j)) {
      rem_b -= rem_a;  // carries any degenerate remainder forward
      rem_a = a[++i];
    } else {
      rem_a -= rem_b;
      rem_b = b[++j];
    }
  }
  return basis;
}

// Node potentials from the tree: u[i] + v[j] = C(i, j) on basic arcs.
void compute_potentials(const Basis& basis, const Matrix& C, Vector& u,
                        Vector& v, std::vector<Index>& stack,
                        std::vector<char>& seen) {
  const Index ns = basis.ns;
  seen.assign(basis.nodes(), 0);
  stack.clear();
  stack.push_back(0);
  seen[0] = 1;
  u[0] = 0.0;
  while (!stack.empty()) {
    const Index node = stack.back();
    stack.pop_back();
    for (int slot : basis.adj[node]) {
      const Index next = basis.other_end(slot, node);
      if (seen[next]) continue;
      seen[next] = 1;
      const Index ai = basis.arc_i[slot], aj = basis.arc_j[slot];
      if (next >= ns)
        v[next - ns] = C(ai, aj) - u[ai];
      else
        u[next] = C(ai, aj) - v[aj];
      stack.push_back(next);
    }
  }
}

// Unique tree path between two nodes, as a list of basic arc ids.
std::vector<int> tree_path(const Basis& basis, Index from, Index to,
                           std::vector<int>& parent_arc,
                           std::vector<Index>& queue) {
  parent_arc.assign(basis.nodes(), -1);
  queue.clear();
  queue.push_back(from);
  parent_arc[from] = -2;  // mark visited root
  for (size_t head = 0; head < queue.size(); ++head) {
    const Index node = queue[head];
    if (node == to) break;
    for (int slot : basis.adj[node]) {
      const Index next = basis.other_end(slot, node);
      if (parent_arc[next] != -1) continue;
      parent_arc[next] = slot;
      queue.push_back(next);
    }
  }
  std::vector<int> path;
  Index node = to;
  while (node != from) {
    const int slot = parent_arc[node];
    path.push_back(slot);
    node = basis.other_end(slot, node);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Coupling solve_exact(const DiscreteMeasure& mu_s, const DiscreteMeasure& mu_t,
                     const CostMatrix& C, long max_pivots) {
  const Index ns = mu_s.size(), nt = mu_t.size();
  if (C.rows() != ns || C.cols() != nt)
    throw Error("cost matrix shape mismatch");
  if (!C.values.allFinite()) throw Error("invalid data");

  // Re-normalize marginals so both sides carry identical total mass;
  // rounding residue goes to the largest atom.
  Vector a = normalize_weights(mu_s.weights());
  Vector b = normalize_weights(mu_t.weights());

  Basis basis = northwest_corner(a, b);
  Vector u(ns), v(nt);
  std::vector<Index> stack;
  std::vector<char> seen;
  std::vector<int> parent_arc;
  std::vector<Index> queue;
  Matrix reduced(ns, nt);

  const double scale = 1.0 + C.values.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * scale;
  if (max_pivots <= 0) max_pivots = 100 * static_cast<long>(ns + nt) + 1000;

  bool bland = false;
  long degenerate_run = 0;
  long pivot = 0;
  for (; pivot < max_pivots; ++pivot) {
    compute_potentials(basis, C.values, u, v, stack, seen);

    // Entering arc: most negative reduced cost (Dantzig), or the first
    // one in row-major order while Bland's anti-cycling rule is active.
    reduced = C.values;
    reduced.colwise() -= u;
    reduced.rowwise() -= v.transpose();
    Index ei = -1, ej = -1;
    if (!bland) {
      Index mi, mj;
      const double mrc = reduced.minCoeff(&mi, &mj);
      if (mrc >= -tol) break;  // optimal
      ei = mi;
      ej = mj;
    } else {
      for (Index i = 0; i < ns && ei < 0; ++i)
        for (Index j = 0; j < nt; ++j)
          if (reduced(i, j) < -tol) {
            ei = i;
            ej = j;
            break;
          }
      if (ei < 0) break;  // optimal
    }

    // Close the cycle: tree path from the entering source to the
    // entering sink. Cells along the path alternate -theta, +theta,
    // starting with -theta (they share rows/columns with the entering
    // cell, which carries +theta).
    const std::vector<int> path =
        tree_path(basis, ei, basis.ns + ej, parent_arc, queue);
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    Index leaving_key = -1;
    for (size_t t = 0; t < path.size(); t += 2) {
      const int slot = path[t];
      const Index key = basis.arc_i[slot] * nt + basis.arc_j[slot];
      if (basis.flow[slot] < theta ||
          (basis.flow[slot] == theta && key < leaving_key)) {
        theta = basis.flow[slot];
        leaving = slot;
        leaving_key = key;
      }
    }

    for (size_t t = 0; t < path.size(); ++t) {
      const int slot = path[t];
      basis.flow[slot] += (t % 2 == 0) ? -theta : theta;
      if (basis.flow[slot] < 0.0) basis.flow[slot] = 0.0;
    }
    basis.remove_arc(leaving);
    basis.add_arc(leaving, ei, ej, theta);

    if (theta <= 0.0) {
      if (++degenerate_run > static_cast<long>(ns + nt)) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }

  Coupling result;
  result.plan = Matrix::Zero(ns, nt);
  for (size_t slot = 0; slot < basis.flow.size(); ++slot)
    result.plan(basis.arc_i[slot], basis.arc_j[slot]) = basis.flow[slot];
  result.source_marginal = a;
  result.target_marginal = b;

  if (pivot >= max_pivots) {
    compute_potentials(basis, C.values, u, v, stack, seen);
    reduced = C.values;
    reduced.colwise() -= u;
    reduced.rowwise() -= v.transpose();
    const double gap_estimate = std::max(0.0, -reduced.minCoeff());
    throw ConvergenceError("exact solver pivot cap reached", result.plan,
                           gap_estimate, pivot);
  }
  return result;
}

std::pair<std::vector<Index>, double> brute_force_assignment(
    const CostMatrix& C) {
  const Index n = C.rows();
  if (n != C.cols() || n > 8) throw Error("oracle size cap");
  std::vector<Index> perm(n), best(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (Index i = 0; i < n; ++i) cost += C.values(i, perm[i]);
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, best_cost};
}

}  // namespace otda
