// pipeline.hpp - sequential driver over a batch sequence.
//
// Runs cluster_timestep on each batch with seeded random-restart scan
// orders, keeps the lowest-cost restart, and carries dormant cluster
// records forward so cluster ids persist across timesteps.  Also exposes
// the (lambda, N_Q, k_tau) reparameterization: N_Q is the number of steps
// a cluster can stay unobserved before revival becomes impossible, and
// k_tau*lambda is the squared-distance revival boundary after one step.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dynmeans/core.hpp"

namespace dynmeans {

struct ReparamConfig {
  double lambda = 1.0;
  double n_q = 2.0;    // > 1
  double k_tau = 1.0;  // >= 1

  void validate() const;
};

// Q = lambda/N_Q,  tau = (N_Q(k_tau - 1) + 1)/(N_Q - 1).
DynMeansParams reparameterize(const ReparamConfig& cfg);

struct RunConfig {
  DynMeansParams params;
  std::optional<ReparamConfig> reparam;  // set when params came from reparameterize
  int restarts = 1;
  int max_iters = kDefaultMaxIters;
  std::uint64_t seed = 0;

  static RunConfig from_params(DynMeansParams p, int restarts = 1,
                               std::uint64_t seed = 0, int max_iters = kDefaultMaxIters);
  static RunConfig from_reparam(ReparamConfig r, int restarts = 1,
                                std::uint64_t seed = 0, int max_iters = kDefaultMaxIters);
  void validate() const;
};

// Deterministic scan order for (seed, timestep, restart).
std::vector<int> make_scan_order(std::size_t n, std::uint64_t seed, std::size_t timestep,
                                 int restart);

// Dormant records for the next timestep: unrevived records age by one, every
// active cluster goes dormant at age 1 with its final center and weight.
std::vector<OldClusterRecord> update_c(const std::vector<ActiveCluster>& active,
                                       const std::vector<OldClusterRecord>& unrevived);

// Drops records that can never be revived again: once age*Q exceeds lambda,
// opening a new cluster is always cheaper than reviving.
std::vector<OldClusterRecord> prune_unrevivable(std::vector<OldClusterRecord> records,
                                                const DynMeansParams& params);

struct TimestepSummary {
  std::vector<ClusterId> labels;
  std::vector<Decision> kinds;
  std::vector<ActiveCluster> clusters;  // state after the winning restart
  double cost = 0.0;
  int iterations = 0;
  bool converged = true;
  double wall_seconds = 0.0;            // clustering compute across all restarts
  std::vector<double> restart_costs;    // final cost of every restart, in order
};

struct GenealogyEntry {
  std::size_t birth_step = 0;
  std::vector<std::size_t> observed_steps;
};

struct SequenceResult {
  std::vector<TimestepSummary> steps;
  std::map<ClusterId, GenealogyEntry> genealogy;
  bool all_converged = true;
};

// Clusters every batch in order.  Each timestep runs cfg.restarts restarts
// from the same incoming dormant set with independent scan orders and keeps
// the lowest-cost result; ids flow through the dormant records so a revived
// cluster keeps the id from its last observation.  Throws
// std::invalid_argument if batches disagree on dimension or contain
// non-finite coordinates.
SequenceResult run_sequence(const std::vector<Batch>& batches, const RunConfig& cfg);

}  // namespace dynmeans
