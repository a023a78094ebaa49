// baselines.hpp - DP-Means, the single-batch baseline.
//
// Standard DP-Means coordinate descent: a point joins the nearest center
// unless every squared distance exceeds lambda, in which case it opens a new
// center at its own position.  Written to use the same scan-order, tie-break
// and stopping rules as the per-timestep Dynamic Means pass, so that with no
// dormant clusters the two produce identical results.
#pragma once

#include <span>
#include <vector>

#include "dynmeans/core.hpp"

namespace dynmeans {

struct DpMeansResult {
  std::vector<ClusterId> labels;       // per-point center id
  std::vector<ClusterId> center_ids;   // ids of surviving centers, ascending
  std::vector<Point> centers;          // aligned with center_ids
  double cost = 0.0;                   // lambda*K + sum of squared distances
  std::vector<double> cost_trace;
  int iterations = 0;
  bool converged = false;
};

DpMeansResult dp_means(const Batch& points, double lambda,
                       std::span<const int> scan_order, int max_iters);

}  // namespace dynmeans
