// synthgen.hpp - moving Gaussian cluster benchmark with ground truth.
//
// A fixed number of clusters live on the unit square.  Every timestep each
// cluster emits a fixed number of points around its center; between
// timesteps each center takes an isotropic Gaussian step, and each cluster
// dies with a fixed probability, immediately replaced by a fresh cluster
// (new id, uniform position) so the live count stays constant.  Centers and
// points are not clipped to the square.
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dynmeans/core.hpp"

namespace dynmeans {

struct SynthConfig {
  int n_clusters = 5;
  int points_per_cluster = 15;
  double point_std = 0.05;
  double motion_std = 0.05;
  double death_prob = 0.05;
  int n_steps = 100;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrueTrajectory {
  std::size_t birth_step = 0;
  std::size_t death_step = 0;  // one past the last step alive
  std::vector<Point> centers;  // one per step alive
};

struct LabeledBatchSequence {
  std::vector<Batch> batches;
  std::vector<std::vector<ClusterId>> labels;  // true id per point, aligned
  std::map<ClusterId, TrueTrajectory> trajectories;
};

LabeledBatchSequence generate(const SynthConfig& cfg);

}  // namespace dynmeans
