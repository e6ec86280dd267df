#include "otda/pipeline.hpp"

#include <algorithm>
#include <numeric>

#include "otda/exact_ot.hpp"
#include "otda/mapping.hpp"
#include "otda/parallel.hpp"
#include "otda/sinkhorn.hpp"

namespace otda {

Method method_from_string(const std::string& name) {
  if (name == "exact" || name == "OT-exact") return Method::ExactOT;
  if (name == "sinkhorn" || name == "OT-IT") return Method::EntropicOT;
  if (name == "gl" || name == "OT-GL") return Method::GroupLassoOT;
  if (name == "laplace" || name == "OT-Laplace") return Method::LaplaceOT;
  throw Error("unknown method: " + name);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::ExactOT: return "OT-exact";
    case Method::EntropicOT: return "OT-IT";
    case Method::GroupLassoOT: return "OT-GL";
    case Method::LaplaceOT: return "OT-Laplace";
  }
  throw Error("unknown method");
}

AdaptationModel fit(Method method, const LabeledDataset& source,
                    const Matrix& target_X, const FitConfig& cfg,
                    const std::vector<int>& target_partial_labels) {
  if (source.X.rows() == 0 || target_X.rows() == 0)
    throw Error("empty measure");
  if (source.X.cols() != target_X.cols())
    throw Error("feature dimension mismatch");
  if (static_cast<Index>(source.y.size()) != source.X.rows())
    throw Error("label count mismatch");

  const DiscreteMeasure mu_s = uniform_measure(source.X);
  const DiscreteMeasure mu_t = uniform_measure(target_X);

  AdaptationModel model;
  model.method = method;
  model.config = cfg;

  CostMatrix C = pairwise_cost(source.X, target_X, cfg.metric);
  if (cfg.normalize_cost) C = normalize_costs(C);
  if (!target_partial_labels.empty()) {
    C = apply_label_mask(C, source.y, target_partial_labels);
    model.semi_supervised = true;
  }

  SinkhornOptions sopts;
  sopts.lambda = cfg.lambda;
  sopts.max_iters = cfg.sinkhorn_max_iters;
  sopts.tol = cfg.sinkhorn_tol;
  sopts.log_domain = cfg.log_domain;

  GcgConfig gcg;
  gcg.lambda = cfg.lambda;
  gcg.eta = cfg.eta;
  gcg.max_outer_iters = cfg.max_outer_iters;
  gcg.rel_tol = cfg.rel_tol;
  gcg.sinkhorn = sopts;

  switch (method) {
    case Method::ExactOT:
      model.coupling = solve_exact(mu_s, mu_t, C);
      break;
    case Method::EntropicOT:
      model.coupling = solve_entropic(mu_s, mu_t, C, sopts);
      break;
    case Method::GroupLassoOT: {
      gcg.regularizer = Regularizer::GroupLasso;
      RegContext ctx = GroupLassoContext{source.groups()};
      auto [coupling, trace] = solve_gcg(mu_s, mu_t, C, gcg, ctx);
      model.coupling = std::move(coupling);
      model.trace = std::move(trace);
      break;
    }
    case Method::LaplaceOT: {
      gcg.regularizer = Regularizer::Laplacian;
      LaplacianContext lap;
      lap.Xs = source.X;
      lap.Xt = target_X;
      lap.Ls = build_source_graph(source.X, source.y, cfg.graph_k).laplacian;
      if (cfg.alpha > 0.0)
        lap.Lt = build_target_graph(target_X, cfg.graph_k).laplacian;
      lap.alpha = cfg.alpha;
      lap.ns_scale = 1.0;
      RegContext ctx = std::move(lap);
      auto [coupling, trace] = solve_gcg(mu_s, mu_t, C, gcg, ctx);
      model.coupling = std::move(coupling);
      model.trace = std::move(trace);
      break;
    }
  }

  model.mapped_source = barycentric_map(model.coupling, target_X);
  return model;
}

std::vector<int> knn_predict(const Matrix& train_X,
                             const std::vector<int>& train_y,
                             const Matrix& test_X, Index k) {
  const Index n = train_X.rows();
  if (n == 0) throw Error("empty training set");
  if (static_cast<Index>(train_y.size()) != n)
    throw Error("label count mismatch");
  if (train_X.cols() != test_X.cols())
    throw Error("feature dimension mismatch");
  if (k < 1 || k > n) throw Error("neighborhood too large");

  std::vector<int> pred(test_X.rows());
  std::vector<Index> order(n);
  for (Index m = 0; m < test_X.rows(); ++m) {
    const Vector d =
        (train_X.rowwise() - test_X.row(m)).rowwise().squaredNorm();
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Index a, Index b) {
                        if (d[a] != d[b]) return d[a] < d[b];
                        return a < b;  // distance tie: smaller index
                      });
    // majority vote; ties go to the class holding the smallest index
    std::map<int, std::pair<int, Index>> votes;  // class -> (count, min idx)
    for (Index t = 0; t < k; ++t) {
      const Index idx = order[t];
      auto [it, fresh] = votes.try_emplace(train_y[idx], 0, idx);
      ++it->second.first;
      it->second.second = std::min(it->second.second, idx);
    }
    int best_class = votes.begin()->first;
    std::pair<int, Index> best{0, n};
    for (const auto& [cls, tally] : votes) {
      const bool wins = tally.first > best.first ||
                        (tally.first == best.first &&
                         tally.second < best.second);
      if (wins) {
        best = tally;
        best_class = cls;
      }
    }
    pred[m] = best_class;
  }
  return pred;
}

Evaluation evaluate(const std::vector<int>& predicted,
                    const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw Error("length mismatch");
  if (predicted.empty()) throw Error("empty evaluation");
  Evaluation out;
  std::map<int, std::pair<long, long>> per_class;  // correct, total
  long correct = 0;
  for (size_t i = 0; i < truth.size(); ++i) {
    auto& tally = per_class[truth[i]];
    ++tally.second;
    if (predicted[i] == truth[i]) {
      ++tally.first;
      ++correct;
    }
  }
  out.accuracy = static_cast<double>(correct) /
                 static_cast<double>(truth.size());
  out.error_rate = 1.0 - out.accuracy;
  for (const auto& [cls, tally] : per_class)
    out.per_class_accuracy[cls] = static_cast<double>(tally.first) /
                                  static_cast<double>(tally.second);
  return out;
}

GridResult grid_validate(Method method, const LabeledDataset& source,
                         const LabeledDataset& validation,
                         const std::vector<GridPoint>& grid,
                         const FitConfig& base, Index knn_k, int jobs) {
  if (grid.empty()) throw Error("empty grid");
  if (validation.size() == 0) throw Error("empty measure");

  std::vector<GridScore> scores(grid.size());
  std::vector<AdaptationModel> models(grid.size());
  parallel_for(static_cast<Index>(grid.size()), jobs, [&](Index g) {
    FitConfig cfg = base;
    cfg.lambda = grid[g].lambda;
    cfg.eta = grid[g].eta;
    AdaptationModel model = fit(method, source, validation.X, cfg);
    const auto pred =
        knn_predict(model.mapped_source, source.y, validation.X, knn_k);
    scores[g] = {grid[g], evaluate(pred, validation.y).accuracy};
    models[g] = std::move(model);
  });

  size_t best = 0;
  for (size_t g = 1; g < scores.size(); ++g) {
    const auto& cand = scores[g];
    const auto& incumbent = scores[best];
    const bool wins =
        cand.accuracy > incumbent.accuracy ||
        (cand.accuracy == incumbent.accuracy &&
         (cand.point.lambda < incumbent.point.lambda ||
          (cand.point.lambda == incumbent.point.lambda &&
           cand.point.eta < incumbent.point.eta)));
    if (wins) best = g;
  }

  GridResult out;
  out.best = scores[best].point;
  out.best_accuracy = scores[best].accuracy;
  out.best_model = std::move(models[best]);
  out.scores = std::move(scores);
  return out;
}

LabeledDataset subsample_per_class(const LabeledDataset& data,
                                   Index per_class, std::mt19937_64& rng) {
  if (per_class < 1) throw Error("invalid solver options");
  std::map<int, std::vector<Index>> by_class;
  for (size_t i = 0; i < data.y.size(); ++i)
    by_class[data.y[i]].push_back(static_cast<Index>(i));

  std::vector<Index> keep;
  for (auto& [cls, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const Index take = std::min<Index>(per_class, idx.size());
    keep.insert(keep.end(), idx.begin(), idx.begin() + take);
  }

  LabeledDataset out;
  out.class_names = data.class_names;
  out.X.resize(static_cast<Index>(keep.size()), data.X.cols());
  out.y.resize(keep.size());
  for (size_t p = 0; p < keep.size(); ++p) {
    out.X.row(static_cast<Index>(p)) = data.X.row(keep[p]);
    out.y[p] = data.y[keep[p]];
  }
  return out;
}

std::pair<LabeledDataset, LabeledDataset> split_half(
    const LabeledDataset& data, std::mt19937_64& rng) {
  const Index n = data.size();
  if (n < 2) throw Error("empty measure");
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const Index first = (n + 1) / 2;

  const auto take = [&](Index from, Index to) {
    LabeledDataset part;
    part.class_names = data.class_names;
    part.X.resize(to - from, data.X.cols());
    part.y.resize(to - from);
    for (Index p = from; p < to; ++p) {
      part.X.row(p - from) = data.X.row(order[p]);
      part.y[p - from] = data.y[order[p]];
    }
    return part;
  };
  return {take(0, first), take(first, n)};
}

}  // namespace otda
