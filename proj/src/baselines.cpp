#include "dynmeans/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace dynmeans {

namespace {

struct Center {
  ClusterId id;
  Point pos;
  int members;
};

// One assignment pass; new centers open at the point and are visible to the
// rest of the pass.  Emptied centers are dropped at the end (ids retired).
std::vector<ClusterId> assign_pass(const Batch& points, std::vector<Center>& centers,
                                   double lambda, std::span<const int> scan_order,
                                   ClusterId& next_id) {
  std::vector<ClusterId> labels(points.size());
  for (auto& c : centers) c.members = 0;

  for (const int idx : scan_order) {
    const Point& y = points[static_cast<std::size_t>(idx)];
    double best_cost = lambda;  // opening a new center
    std::size_t best_k = centers.size();
    ClusterId best_id = next_id;
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const double c = sq_dist(y, centers[k].pos);
      // ties prefer an existing center, then the smaller id
      if (c < best_cost || (c == best_cost &&
                            (best_k == centers.size() || centers[k].id < best_id))) {
        best_cost = c;
        best_k = k;
        best_id = centers[k].id;
      }
    }
    if (best_k == centers.size()) {
      centers.push_back(Center{next_id++, y, 1});
    } else {
      centers[best_k].members += 1;
    }
    labels[static_cast<std::size_t>(idx)] = best_id;
  }

  std::erase_if(centers, [](const Center& c) { return c.members == 0; });
  return labels;
}

double recompute_centers(const Batch& points, const std::vector<ClusterId>& labels,
                         std::vector<Center>& centers, double lambda) {
  const std::size_t dim = points.front().size();
  std::unordered_map<ClusterId, std::size_t> index;
  for (std::size_t k = 0; k < centers.size(); ++k) index.emplace(centers[k].id, k);

  std::vector<Point> sums(centers.size(), Point(dim, 0.0));
  std::vector<int> counts(centers.size(), 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t k = index.at(labels[i]);
    counts[k] += 1;
    for (std::size_t j = 0; j < dim; ++j) sums[k][j] += points[i][j];
  }
  for (std::size_t k = 0; k < centers.size(); ++k)
    for (std::size_t j = 0; j < dim; ++j) centers[k].pos[j] = sums[k][j] / counts[k];

  double cost = lambda * static_cast<double>(centers.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    cost += sq_dist(points[i], centers[index.at(labels[i])].pos);
  return cost;
}

}  // namespace

DpMeansResult dp_means(const Batch& points, double lambda,
                       std::span<const int> scan_order, int max_iters) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("dp_means: lambda must be > 0");
  if (max_iters < 1) throw std::invalid_argument("dp_means: max_iters must be >= 1");

  DpMeansResult res;
  if (points.empty()) {
    res.cost_trace.push_back(0.0);
    res.iterations = 1;
    res.converged = true;
    return res;
  }

  std::vector<Center> centers;
  ClusterId next_id = 0;
  double prev_cost = std::numeric_limits<double>::infinity();
  std::vector<ClusterId> prev_labels;
  for (int n = 1; n <= max_iters; ++n) {
    std::vector<ClusterId> labels = assign_pass(points, centers, lambda, scan_order, next_id);
    const double cost = recompute_centers(points, labels, centers, lambda);
    res.cost_trace.push_back(cost);
    res.iterations = n;
    res.cost = cost;
    const bool labels_fixed = (n > 1) && labels == prev_labels;
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

  std::sort(centers.begin(), centers.end(),
            [](const Center& a, const Center& b) { return a.id < b.id; });
  for (auto& c : centers) {
    res.center_ids.push_back(c.id);
    res.centers.push_back(std::move(c.pos));
  }
  return res;
}

}  // namespace dynmeans
