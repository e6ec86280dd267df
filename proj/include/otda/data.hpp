#ifndef OTDA_DATA_HPP
#define OTDA_DATA_HPP

#include <cstdint>
#include <string>
#include <utility>

#include "otda/pipeline.hpp"
#include "otda/types.hpp"

namespace otda {

/// Generator controls for the rotating two-moons problem. The source
/// moons are two interleaved unit half-circles, the second offset by
/// (1, -0.5); the target (and the fresh test pool) are independent
/// draws of the same shape rotated by rotation_degrees about the
/// moons' distribution centroid (0.5, 0.25).
struct TwoMoonsSpec {
  Index n_per_class = 150;
  double rotation_degrees = 0.0;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
};

struct TwoMoonsData {
  LabeledDataset source;
  LabeledDataset target;
  LabeledDataset test;  ///< 500 per class, same distribution as target
};

/// Seed-deterministic generator. Draw order from one engine: source
/// samples (class 0 then class 1; per sample: arc position, x noise,
/// y noise), then target, then test.
TwoMoonsData two_moons(const TwoMoonsSpec& spec);

/// A source cloud with a symmetric positive definite affine image:
/// Xt = Xs*A + 1*b' with A = Q'*diag(spectrum)*Q, eigenvalues drawn
/// uniformly from spd_spectrum. Rows of Xs are standard normal and
/// redrawn on exact duplicates.
struct AffineInstance {
  Matrix Xs;
  Matrix A;
  Vector b;
  Matrix Xt;
};

AffineInstance affine_instance(Index n, Index d, std::uint64_t seed,
                               std::pair<double, double> spd_spectrum = {0.5,
                                                                         2.0});

/// Reads a delimited text file (comma or tab; optional header row)
/// whose final column is the class label; labels are interned to ids
/// in first-appearance order. Errors carry 1-based line numbers.
LabeledDataset load_labeled(const std::string& path, bool header = false);

/// Same format without the label column.
Matrix load_matrix(const std::string& path, bool header = false);

/// Writes a matrix as comma-delimited text with maximum precision.
void save_matrix(const std::string& path, const Matrix& m);

}  // namespace otda

#endif  // OTDA_DATA_HPP
