#include "dynmeans/synthgen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dynmeans {

void SynthConfig::validate() const {
  if (n_clusters < 1) throw std::invalid_argument("SynthConfig: n_clusters must be >= 1");
  if (points_per_cluster < 1)
    throw std::invalid_argument("SynthConfig: points_per_cluster must be >= 1");
  if (!(point_std >= 0.0) || !std::isfinite(point_std))
    throw std::invalid_argument("SynthConfig: point_std must be >= 0");
  if (!(motion_std >= 0.0) || !std::isfinite(motion_std))
    throw std::invalid_argument("SynthConfig: motion_std must be >= 0");
  if (!(death_prob >= 0.0 && death_prob <= 1.0))
    throw std::invalid_argument("SynthConfig: death_prob must be in [0,1]");
  if (n_steps < 1) throw std::invalid_argument("SynthConfig: n_steps must be >= 1");
}

LabeledBatchSequence generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // normal_distribution requires stddev > 0; a zero-noise config draws nothing
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto point_noise = [&]() { return cfg.point_std > 0.0 ? cfg.point_std * gauss(rng) : 0.0; };
  auto motion = [&]() { return cfg.motion_std > 0.0 ? cfg.motion_std * gauss(rng) : 0.0; };

  struct Slot {
    ClusterId id;
    Point center;
  };

  LabeledBatchSequence out;
  ClusterId next_id = 0;
  std::vector<Slot> slots;
  slots.reserve(static_cast<std::size_t>(cfg.n_clusters));
  for (int k = 0; k < cfg.n_clusters; ++k) {
    Slot s{next_id++, Point{unit(rng), unit(rng)}};
    out.trajectories[s.id] = TrueTrajectory{0, 0, {}};
    slots.push_back(std::move(s));
  }

  for (int t = 0; t < cfg.n_steps; ++t) {
    if (t > 0) {
      // Transition: death (with immediate replacement) first, survivors drift.
      for (auto& s : slots) {
        if (unit(rng) < cfg.death_prob) {
          out.trajectories[s.id].death_step = static_cast<std::size_t>(t);
          s.id = next_id++;
          s.center = Point{unit(rng), unit(rng)};
          out.trajectories[s.id] =
              TrueTrajectory{static_cast<std::size_t>(t), 0, {}};
        } else {
          s.center[0] += motion();
          s.center[1] += motion();
        }
      }
    }

    Batch batch;
    std::vector<ClusterId> labels;
    batch.reserve(slots.size() * static_cast<std::size_t>(cfg.points_per_cluster));
    labels.reserve(batch.capacity());
    for (auto& s : slots) {
      out.trajectories[s.id].centers.push_back(s.center);
      for (int i = 0; i < cfg.points_per_cluster; ++i) {
        batch.push_back(Point{s.center[0] + point_noise(), s.center[1] + point_noise()});
        labels.push_back(s.id);
      }
    }
    out.batches.push_back(std::move(batch));
    out.labels.push_back(std::move(labels));
  }

  for (auto& s : slots)
    out.trajectories[s.id].death_step = static_cast<std::size_t>(cfg.n_steps);
  return out;
}

}  // namespace dynmeans
