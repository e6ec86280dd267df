#ifndef OTDA_PIPELINE_HPP
#define OTDA_PIPELINE_HPP

#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "otda/cost.hpp"
#include "otda/coupling.hpp"
#include "otda/gcg.hpp"
#include "otda/measures.hpp"
#include "otda/regularizers.hpp"
#include "otda/types.hpp"

namespace otda {

/// Feature matrix with integer class ids (one row per sample).
/// class_names maps ids back to the original label strings.
struct LabeledDataset {
  Matrix X;
  std::vector<int> y;
  std::vector<std::string> class_names;

  Index size() const { return X.rows(); }
  Index dim() const { return X.cols(); }
  ClassGroups groups() const { return groups_from_labels(y); }
};

/// Adaptation methods (transport flavors).
enum class Method { ExactOT, EntropicOT, GroupLassoOT, LaplaceOT };

Method method_from_string(const std::string& name);
std::string method_name(Method m);

/// Everything a fit needs beyond the data and the method tag.
struct FitConfig {
  double lambda = 1.0;   ///< entropy weight (ignored by ExactOT)
  double eta = 1.0;      ///< class-regularizer weight (GCG methods)
  double alpha = 0.5;    ///< Laplacian source/target trade-off
  Index graph_k = 8;     ///< neighborhood size for similarity graphs
  Metric metric = Metric::SquaredEuclidean;
  bool normalize_cost = false;  ///< rescale costs to max 1 before solving
  bool log_domain = false;
  double sinkhorn_tol = 1e-9;
  long sinkhorn_max_iters = 10000;
  double rel_tol = 1e-5;      ///< GCG relative-decrease stop
  long max_outer_iters = 50;  ///< GCG outer cap
};

/// A fitted transport with its barycentric mapping.
struct AdaptationModel {
  Method method = Method::ExactOT;
  bool semi_supervised = false;
  FitConfig config;
  Coupling coupling;
  Matrix mapped_source;  ///< barycentric_map(coupling, target X)
  SolveTrace trace;      ///< nonempty for the GCG methods
};

/// Fits the chosen transport from the labeled source onto the target
/// samples (uniform marginals) and stores the barycentric mapping.
/// When target_partial_labels is nonempty (one entry per target row,
/// -1 for unknown) the semi-supervised cost mask is applied first;
/// all-unknown labels reproduce the unsupervised result bit for bit.
AdaptationModel fit(Method method, const LabeledDataset& source,
                    const Matrix& target_X, const FitConfig& cfg,
                    const std::vector<int>& target_partial_labels = {});

/// k-nearest-neighbor classification under squared Euclidean distance.
/// Distance ties prefer the smaller train index; vote ties go to the
/// tied class containing the smallest train index among the neighbors.
std::vector<int> knn_predict(const Matrix& train_X,
                             const std::vector<int>& train_y,
                             const Matrix& test_X, Index k = 1);

struct Evaluation {
  double accuracy = 0.0;
  double error_rate = 0.0;
  std::map<int, double> per_class_accuracy;
};

Evaluation evaluate(const std::vector<int>& predicted,
                    const std::vector<int>& truth);

/// One (lambda, eta) candidate for validation.
struct GridPoint {
  double lambda = 1.0;
  double eta = 1.0;
};

struct GridScore {
  GridPoint point;
  double accuracy = 0.0;
};

struct GridResult {
  GridPoint best;              ///< accuracy ties: smaller lambda, then eta
  double best_accuracy = 0.0;
  AdaptationModel best_model;  ///< the fit that produced best_accuracy
  std::vector<GridScore> scores;  ///< one per grid point, in grid order
};

/// Fits every grid point source -> validation samples, scores a k-NN
/// classifier trained on the mapped source against the validation
/// labels, and returns the best configuration. Grid points run in
/// parallel across `jobs` threads; the reduction is deterministic
/// (grid order, not completion order).
GridResult grid_validate(Method method, const LabeledDataset& source,
                         const LabeledDataset& validation,
                         const std::vector<GridPoint>& grid,
                         const FitConfig& base, Index knn_k = 1,
                         int jobs = 1);

/// Draws `per_class` samples of every class without replacement
/// (all of a class when it has fewer). Selection order: classes by
/// ascending id, rows shuffled per class with the supplied engine.
LabeledDataset subsample_per_class(const LabeledDataset& data,
                                   Index per_class, std::mt19937_64& rng);

/// Random split into two halves (first gets the extra sample on odd
/// sizes). Used for the validation/test protocol on target domains.
std::pair<LabeledDataset, LabeledDataset> split_half(
    const LabeledDataset& data, std::mt19937_64& rng);

}  // namespace otda

#endif  // OTDA_PIPELINE_HPP
