#include "dynmeans/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace dynmeans {

void ReparamConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("ReparamConfig: lambda must be > 0");
  if (!(n_q > 1.0) || !std::isfinite(n_q))
    throw std::invalid_argument("ReparamConfig: n_q must be > 1");
  if (!(k_tau >= 1.0) || !std::isfinite(k_tau))
    throw std::invalid_argument("ReparamConfig: k_tau must be >= 1");
}

DynMeansParams reparameterize(const ReparamConfig& cfg) {
  cfg.validate();
  DynMeansParams p;
  p.lambda = cfg.lambda;
  p.q_penalty = cfg.lambda / cfg.n_q;
  p.tau = (cfg.n_q * (cfg.k_tau - 1.0) + 1.0) / (cfg.n_q - 1.0);
  return p;
}

RunConfig RunConfig::from_params(DynMeansParams p, int restarts, std::uint64_t seed,
                                 int max_iters) {
  RunConfig cfg;
  cfg.params = p;
  cfg.restarts = restarts;
  cfg.seed = seed;
  cfg.max_iters = max_iters;
  return cfg;
}

RunConfig RunConfig::from_reparam(ReparamConfig r, int restarts, std::uint64_t seed,
                                  int max_iters) {
  RunConfig cfg;
  cfg.params = reparameterize(r);
  cfg.reparam = r;
  cfg.restarts = restarts;
  cfg.seed = seed;
  cfg.max_iters = max_iters;
  return cfg;
}

void RunConfig::validate() const {
  params.validate();
  if (reparam) reparam->validate();
  if (restarts < 1) throw std::invalid_argument("RunConfig: restarts must be >= 1");
  if (max_iters < 1) throw std::invalid_argument("RunConfig: max_iters must be >= 1");
}

std::vector<int> make_scan_order(std::size_t n, std::uint64_t seed, std::size_t timestep,
                                 int restart) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(timestep),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<OldClusterRecord> update_c(const std::vector<ActiveCluster>& active,
                                       const std::vector<OldClusterRecord>& unrevived) {
  std::vector<OldClusterRecord> next;
  next.reserve(active.size() + unrevived.size());
  for (const auto& rec : unrevived)
    next.push_back(OldClusterRecord{rec.id, rec.age + 1, rec.center, rec.weight});
  for (const auto& c : active)
    next.push_back(OldClusterRecord{c.id, 1, c.center, c.weight});
  std::sort(next.begin(), next.end(),
            [](const OldClusterRecord& a, const OldClusterRecord& b) { return a.id < b.id; });
  return next;
}

std::vector<OldClusterRecord> prune_unrevivable(std::vector<OldClusterRecord> records,
                                                const DynMeansParams& params) {
  std::erase_if(records, [&](const OldClusterRecord& rec) {
    return rec.age * params.q_penalty > params.lambda;
  });
  return records;
}

namespace {

void check_batches(const std::vector<Batch>& batches) {
  std::size_t dim = 0;
  bool dim_set = false;
  for (const auto& batch : batches) {
    for (const auto& p : batch) {
      if (!dim_set) {
        dim = p.size();
        dim_set = true;
        if (dim == 0) throw std::invalid_argument("run_sequence: zero-dimensional point");
      }
      if (p.size() != dim)
        throw std::invalid_argument("run_sequence: batches disagree on dimension");
      for (double x : p)
        if (!std::isfinite(x))
          throw std::invalid_argument("run_sequence: non-finite coordinate");
    }
  }
}

}  // namespace

SequenceResult run_sequence(const std::vector<Batch>& batches, const RunConfig& cfg) {
  cfg.validate();
  check_batches(batches);

  SequenceResult out;
  out.steps.reserve(batches.size());
  std::vector<OldClusterRecord> old_records;
  ClusterId next_id = 0;

  for (std::size_t t = 0; t < batches.size(); ++t) {
    const Batch& batch = batches[t];
    TimestepSummary summary;
    summary.restart_costs.reserve(static_cast<std::size_t>(cfg.restarts));

    TimestepResult best;
    bool have_best = false;
    for (int r = 0; r < cfg.restarts; ++r) {
      const auto order = make_scan_order(batch.size(), cfg.seed, t, r);
      const auto t0 = std::chrono::steady_clock::now();
      TimestepResult res =
          cluster_timestep(batch, old_records, cfg.params, order, cfg.max_iters, next_id);
      const auto t1 = std::chrono::steady_clock::now();
      summary.wall_seconds += std::chrono::duration<double>(t1 - t0).count();
      summary.restart_costs.push_back(res.cost);
      if (!have_best || res.cost < best.cost) {
        best = std::move(res);
        have_best = true;
      }
    }

    next_id = best.next_id;
    summary.labels = best.labels.ids;
    summary.kinds = best.labels.kinds;
    summary.clusters = best.active;
    summary.cost = best.cost;
    summary.iterations = best.iterations;
    summary.converged = best.converged;
    out.all_converged = out.all_converged && best.converged;

    for (const auto& c : best.active) {
      auto [it, inserted] = out.genealogy.try_emplace(c.id);
      if (inserted) it->second.birth_step = t;
      it->second.observed_steps.push_back(t);
    }

    old_records = prune_unrevivable(update_c(best.active, best.remaining_old), cfg.params);
    out.steps.push_back(std::move(summary));
  }
  return out;
}

}  // namespace dynmeans
