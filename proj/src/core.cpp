#include "dynmeans/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace dynmeans {

double sq_dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void DynMeansParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("DynMeansParams: lambda must be > 0");
  if (!(q_penalty > 0.0) || !std::isfinite(q_penalty))
    throw std::invalid_argument("DynMeansParams: q_penalty must be > 0");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("DynMeansParams: tau must be >= 0");
}

double label_cost(const Point& y, const ActiveCluster& cluster) {
  return sq_dist(y, cluster.center);
}

double label_cost(const Point& y, const OldClusterRecord& record,
                  const DynMeansParams& params) {
  return params.q_penalty * record.age +
         sq_dist(y, record.center) / (params.tau * record.age + 1.0);
}

double gamma(double old_weight, int age, double tau) {
  return 1.0 / (1.0 / old_weight + age * tau);
}

namespace {

// Candidate kinds in tie-break preference order.
enum : int { kInstantiated = 0, kRevived = 1, kNew = 2 };

struct Choice {
  double cost = std::numeric_limits<double>::infinity();
  int kind = kNew;
  ClusterId id = std::numeric_limits<ClusterId>::max();
  std::size_t index = 0;  // position in active/old vector

  void offer(double c, int k, ClusterId cid, std::size_t idx) {
    if (c < cost || (c == cost && (k < kind || (k == kind && cid < id)))) {
      cost = c;
      kind = k;
      id = cid;
      index = idx;
    }
  }
};

// Instantiate a dormant record from a single observation (the combined
// parameter update at n = 1).
ActiveCluster revive_record(const OldClusterRecord& rec, const Point& y, double tau) {
  const double g = gamma(rec.weight, rec.age, tau);
  ActiveCluster c;
  c.id = rec.id;
  c.age = rec.age;
  c.origin_center = rec.center;
  c.origin_weight = rec.weight;
  c.center.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    c.center[i] = (rec.center[i] * g + y[i]) / (g + 1.0);
  c.weight = g + 1.0;
  c.members = 1;
  return c;
}

}  // namespace

LabelAssignment assign_labels(const Batch& batch, std::vector<ActiveCluster>& active,
                              std::vector<OldClusterRecord>& old_records,
                              const DynMeansParams& params,
                              std::span<const int> scan_order, ClusterId& next_id) {
  LabelAssignment labels;
  if (batch.empty()) return labels;

  labels.ids.resize(batch.size());
  labels.kinds.resize(batch.size());
  for (auto& c : active) c.members = 0;
  std::vector<bool> revived_here(old_records.size(), false);

  for (const int obs : scan_order) {
    const Point& y = batch[static_cast<std::size_t>(obs)];
    Choice best;
    best.offer(new_cluster_cost(params), kNew, next_id, 0);
    for (std::size_t k = 0; k < active.size(); ++k)
      best.offer(label_cost(y, active[k]), kInstantiated, active[k].id, k);
    for (std::size_t k = 0; k < old_records.size(); ++k) {
      if (revived_here[k]) continue;
      best.offer(label_cost(y, old_records[k], params), kRevived, old_records[k].id, k);
    }

    switch (best.kind) {
      case kInstantiated: {
        active[best.index].members += 1;
        labels.ids[static_cast<std::size_t>(obs)] = best.id;
        labels.kinds[static_cast<std::size_t>(obs)] = Decision::kJoinedInstantiated;
        break;
      }
      case kRevived: {
        active.push_back(revive_record(old_records[best.index], y, params.tau));
        revived_here[best.index] = true;
        labels.ids[static_cast<std::size_t>(obs)] = best.id;
        labels.kinds[static_cast<std::size_t>(obs)] = Decision::kRevivedOld;
        break;
      }
      case kNew: {
        ActiveCluster c;
        c.id = next_id++;
        c.center = y;
        c.weight = 1.0;
        c.members = 1;
        c.age = 0;
        c.origin_center = y;
        c.origin_weight = 1.0;
        active.push_back(c);
        labels.ids[static_cast<std::size_t>(obs)] = c.id;
        labels.kinds[static_cast<std::size_t>(obs)] = Decision::kCreatedNew;
        break;
      }
    }
  }

  // Drop clusters the pass emptied; a revival goes back to its record.
  std::vector<ActiveCluster> kept;
  kept.reserve(active.size());
  for (auto& c : active) {
    if (c.members > 0) {
      kept.push_back(std::move(c));
    } else if (c.age >= 1) {
      old_records.push_back(OldClusterRecord{c.id, c.age, c.origin_center, c.origin_weight});
    }
  }
  active = std::move(kept);

  // Remove records revived during this pass (their ids now live in `active`).
  std::vector<OldClusterRecord> remaining;
  remaining.reserve(old_records.size());
  for (std::size_t k = 0; k < old_records.size(); ++k)
    if (k >= revived_here.size() || !revived_here[k])
      remaining.push_back(std::move(old_records[k]));
  old_records = std::move(remaining);
  std::sort(old_records.begin(), old_records.end(),
            [](const OldClusterRecord& a, const OldClusterRecord& b) { return a.id < b.id; });
  return labels;
}

double assign_params(const Batch& batch, const LabelAssignment& labels,
                     std::vector<ActiveCluster>& active, const DynMeansParams& params) {
  if (active.empty()) return compute_cost(active, batch, labels, params);
  const std::size_t dim = active.front().center.size();

  std::unordered_map<ClusterId, std::size_t> index;
  index.reserve(active.size());
  for (std::size_t k = 0; k < active.size(); ++k) index.emplace(active[k].id, k);

  std::vector<Point> sums(active.size(), Point(dim, 0.0));
  std::vector<int> counts(active.size(), 0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::size_t k = index.at(labels.ids[i]);
    counts[k] += 1;
    for (std::size_t j = 0; j < dim; ++j) sums[k][j] += batch[i][j];
  }

  for (std::size_t k = 0; k < active.size(); ++k) {
    ActiveCluster& c = active[k];
    const int n = counts[k];
    if (n == 0)
      throw std::invalid_argument("assign_params: active cluster " +
                                  std::to_string(c.id) + " has no members");
    c.members = n;
    Point mean(dim);
    for (std::size_t j = 0; j < dim; ++j) mean[j] = sums[k][j] / n;
    if (c.age == 0) {
      c.center = mean;
      c.weight = static_cast<double>(n);
      c.origin_center = c.center;
      c.origin_weight = c.weight;
    } else {
      const double g = gamma(c.origin_weight, c.age, params.tau);
      for (std::size_t j = 0; j < dim; ++j)
        c.center[j] = (c.origin_center[j] * g + n * mean[j]) / (g + n);
      c.weight = g + n;
    }
  }
  return compute_cost(active, batch, labels, params);
}

double compute_cost(const std::vector<ActiveCluster>& active, const Batch& batch,
                    const LabelAssignment& labels, const DynMeansParams& params) {
  if (active.empty()) return 0.0;

  std::unordered_map<ClusterId, std::size_t> index;
  index.reserve(active.size());
  for (std::size_t k = 0; k < active.size(); ++k) index.emplace(active[k].id, k);

  double cost = 0.0;
  for (const auto& c : active) {
    if (c.age == 0) {
      cost += params.lambda;  // prior term is zero: center == origin
    } else {
      cost += params.q_penalty * c.age +
              gamma(c.origin_weight, c.age, params.tau) * sq_dist(c.center, c.origin_center);
    }
  }
  for (std::size_t i = 0; i < batch.size(); ++i)
    cost += sq_dist(batch[i], active[index.at(labels.ids[i])].center);
  return cost;
}

TimestepResult cluster_timestep(const Batch& batch,
                                std::vector<OldClusterRecord> old_records,
                                const DynMeansParams& params,
                                std::span<const int> scan_order, int max_iters,
                                ClusterId next_id) {
  params.validate();
  if (max_iters < 1) throw std::invalid_argument("cluster_timestep: max_iters must be >= 1");

  TimestepResult res;
  res.next_id = next_id;
  if (batch.empty()) {
    res.remaining_old = std::move(old_records);
    res.cost_trace.push_back(0.0);
    res.iterations = 1;
    res.converged = true;
    return res;
  }

  double prev_cost = std::numeric_limits<double>::infinity();
  LabelAssignment prev_labels;
  for (int n = 1; n <= max_iters; ++n) {
    LabelAssignment labels =
        assign_labels(batch, res.active, old_records, params, scan_order, res.next_id);
    const double cost = assign_params(batch, labels, res.active, params);
    res.cost_trace.push_back(cost);
    res.iterations = n;
    res.cost = cost;
    const bool labels_fixed = (n > 1) && labels.same_ids(prev_labels);
    const bool cost_fixed =
        (n > 1) && (prev_cost - cost) < kRelCostTol * std::max(1.0, prev_cost);
    res.labels = std::move(labels);
    if (labels_fixed || cost_fixed) {
      res.converged = true;
      break;
    }
    prev_labels = res.labels;
    prev_cost = cost;
  }
  res.remaining_old = std::move(old_records);
  return res;
}

}  // namespace dynmeans
