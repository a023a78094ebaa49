// eval.hpp - clustering accuracy with and without tracking enforcement.
//
// Accuracy is the fraction of points whose learned cluster maps to their
// true cluster under a one-to-one correspondence chosen to maximize total
// agreement (min-cost assignment on the negated contingency table;
// unmatched learned clusters score zero).  The tracked variant uses one
// correspondence across all timesteps; the untracked variant matches each
// timestep independently and pools the agreements.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dynmeans/core.hpp"
#include "dynmeans/pipeline.hpp"
#include "dynmeans/synthgen.hpp"

namespace dynmeans {

struct Matching {
  std::vector<int> assignment;  // row -> column, -1 if unmatched
  double cost = 0.0;            // sum of matched entries
};

// Minimum-cost one-to-one assignment of the smaller side of a rectangular
// matrix into the larger (Kuhn-Munkres with potentials).  Entries must be
// finite.  An empty matrix yields an empty assignment.
Matching optimal_matching(const std::vector<std::vector<double>>& cost);

struct AccuracyReport {
  double tracked = 0.0;
  double untracked = 0.0;
  struct Step {
    std::size_t step = 0;
    std::size_t points = 0;
    double tracked_acc = 1.0;    // global correspondence restricted to this step
    double untracked_acc = 1.0;  // independent per-step correspondence
  };
  std::vector<Step> steps;
  std::vector<std::pair<ClusterId, ClusterId>> matched;  // learned -> true, overlap > 0
};

// Per-timestep learned vs true labels; inner vectors must be aligned
// point-for-point.  Throws std::invalid_argument on shape mismatch.
AccuracyReport tracked_accuracy(const std::vector<std::vector<ClusterId>>& learned,
                                const std::vector<std::vector<ClusterId>>& truth);

AccuracyReport tracked_accuracy(const SequenceResult& result,
                                const LabeledBatchSequence& truth);

// Confidence-weighted single-batch accuracy: sum of weights of points
// labeled correctly under the max-weighted-agreement correspondence,
// divided by the total weight.  Weights must be in [0,1]; an all-zero
// weight vector has no defined ratio and yields nullopt.
std::optional<double> weighted_accuracy(const std::vector<ClusterId>& labels,
                                        const std::vector<ClusterId>& truth_labels,
                                        const std::vector<double>& weights);

}  // namespace dynmeans
