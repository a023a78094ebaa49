// core.hpp - per-timestep Dynamic Means coordinate descent.
//
// One timestep clusters a batch of d-dimensional observations against the
// state left behind by previous timesteps: a set of dormant cluster records
// (center, accumulated weight, steps since last observed).  Each observation
// may join a currently instantiated cluster, revive a dormant one, or open a
// new cluster; parameters are then re-estimated by a weighted least-squares
// update that blends the dormant center with the new data.  The two passes
// alternate until the labels stop changing.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dynmeans {

using Point = std::vector<double>;
using Batch = std::vector<Point>;
using ClusterId = std::int64_t;

// Squared Euclidean distance; the algorithm never needs the root.
double sq_dist(const Point& a, const Point& b);

// Stop a timestep when the relative cost decrease falls below this (labels
// usually fix first; this catches label churn between equal-cost states).
inline constexpr double kRelCostTol = 1e-12;
inline constexpr int kDefaultMaxIters = 100;

struct DynMeansParams {
  double lambda = 1.0;     // cost of opening a new cluster
  double q_penalty = 1.0;  // revival penalty per dormant step
  double tau = 0.0;        // growth rate of positional uncertainty per dormant step

  // Throws std::invalid_argument unless lambda > 0, q_penalty > 0, tau >= 0.
  void validate() const;
};

// A cluster holding at least one observation in the current timestep.
// origin_center/origin_weight/age freeze the dormant record it was revived
// from (age = 0 for clusters born this timestep, with origin == current).
struct ActiveCluster {
  ClusterId id = 0;
  Point center;
  double weight = 0.0;
  int members = 0;
  int age = 0;
  Point origin_center;
  double origin_weight = 0.0;
};

// A cluster observed in some past timestep but not the current one.
struct OldClusterRecord {
  ClusterId id = 0;
  int age = 1;  // timesteps since last observed, >= 1
  Point center;
  double weight = 0.0;
};

enum class Decision : std::uint8_t {
  kJoinedInstantiated,
  kRevivedOld,
  kCreatedNew,
};

// One label per observation, aligned with the batch.
struct LabelAssignment {
  std::vector<ClusterId> ids;
  std::vector<Decision> kinds;

  bool same_ids(const LabelAssignment& other) const { return ids == other.ids; }
};

// Candidate costs for one observation (the label update rule):
//   instantiated:  ||y - center||^2
//   dormant:       Q*age + ||y - old center||^2 / (tau*age + 1)
//   new:           lambda
double label_cost(const Point& y, const ActiveCluster& cluster);
double label_cost(const Point& y, const OldClusterRecord& record,
                  const DynMeansParams& params);
inline double new_cluster_cost(const DynMeansParams& params) { return params.lambda; }

// Effective prior weight of a dormant center after `age` unobserved steps:
// (1/old_weight + age*tau)^-1.  Equals old_weight at age 0.
double gamma(double old_weight, int age, double tau);

// One label pass in scan order.  Each observation takes the cheapest
// candidate; ties prefer instantiated over revived over new, then the
// smaller cluster id.  Reviving or creating immediately instantiates the
// cluster from that single observation, so later observations in the same
// pass see it (its center is not re-estimated until assign_params).
// Clusters left without members at the end of the pass are removed; a
// revival's dormant record is restored unchanged.  next_id supplies ids for
// new clusters and is advanced past every id handed out.
LabelAssignment assign_labels(const Batch& batch, std::vector<ActiveCluster>& active,
                              std::vector<OldClusterRecord>& old_records,
                              const DynMeansParams& params,
                              std::span<const int> scan_order, ClusterId& next_id);

// Re-estimates every active cluster from its members: new clusters take the
// member mean with weight n; revived ones blend the dormant center with the
// member mean through gamma.  Returns the resulting cost (compute_cost).
// Throws std::invalid_argument if an active cluster has no members.
double assign_params(const Batch& batch, const LabelAssignment& labels,
                     std::vector<ActiveCluster>& active, const DynMeansParams& params);

// Cost of the current state:
//   sum_k( lambda*[age=0] + Q*age + gamma_k*||center - origin||^2
//          + sum_{members} ||y - center||^2 )
// The prior term vanishes for age-0 clusters (center == origin).
double compute_cost(const std::vector<ActiveCluster>& active, const Batch& batch,
                    const LabelAssignment& labels, const DynMeansParams& params);

struct TimestepResult {
  std::vector<ActiveCluster> active;
  std::vector<OldClusterRecord> remaining_old;  // dormant records not revived
  LabelAssignment labels;
  double cost = 0.0;
  std::vector<double> cost_trace;  // cost after each iteration, non-increasing
  int iterations = 0;
  bool converged = false;
  ClusterId next_id = 0;
};

// Alternates assign_labels / assign_params until the labels repeat, the
// relative cost decrease drops below kRelCostTol, or max_iters is hit
// (result flagged unconverged).  The same scan order is used every
// iteration.  An empty batch returns an empty clustering at cost 0.
TimestepResult cluster_timestep(const Batch& batch,
                                std::vector<OldClusterRecord> old_records,
                                const DynMeansParams& params,
                                std::span<const int> scan_order, int max_iters,
                                ClusterId next_id);

}  // namespace dynmeans
