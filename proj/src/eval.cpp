#include "dynmeans/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace dynmeans {

namespace {

// Kuhn-Munkres with row/column potentials, n rows <= m columns.
// Returns row -> column.
std::vector<int> solve_rows_le_cols(const std::vector<std::vector<double>>& a) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(a.front().size());
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

Matching optimal_matching(const std::vector<std::vector<double>>& cost) {
  Matching result;
  if (cost.empty()) return result;
  const std::size_t rows = cost.size();
  const std::size_t cols = cost.front().size();
  for (const auto& row : cost) {
    if (row.size() != cols)
      throw std::invalid_argument("optimal_matching: ragged cost matrix");
    for (double x : row)
      if (!std::isfinite(x))
        throw std::invalid_argument("optimal_matching: non-finite entry");
  }
  if (cols == 0) {
    result.assignment.assign(rows, -1);
    return result;
  }

  if (rows <= cols) {
    result.assignment = solve_rows_le_cols(cost);
  } else {
    std::vector<std::vector<double>> t(cols, std::vector<double>(rows));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t[j][i] = cost[i][j];
    const auto col_to_row = solve_rows_le_cols(t);
    result.assignment.assign(rows, -1);
    for (std::size_t j = 0; j < cols; ++j)
      if (col_to_row[j] >= 0) result.assignment[static_cast<std::size_t>(col_to_row[j])] =
          static_cast<int>(j);
  }
  for (std::size_t i = 0; i < rows; ++i)
    if (result.assignment[i] >= 0)
      result.cost += cost[i][static_cast<std::size_t>(result.assignment[i])];
  return result;
}

namespace {

// Dense contingency table with stable id indexing.
struct Contingency {
  std::vector<ClusterId> learned_ids;  // sorted
  std::vector<ClusterId> true_ids;     // sorted
  std::vector<std::vector<std::size_t>> counts;

  std::size_t learned_index(ClusterId id) const {
    return static_cast<std::size_t>(
        std::lower_bound(learned_ids.begin(), learned_ids.end(), id) - learned_ids.begin());
  }
  std::size_t true_index(ClusterId id) const {
    return static_cast<std::size_t>(
        std::lower_bound(true_ids.begin(), true_ids.end(), id) - true_ids.begin());
  }
};

Contingency build_contingency(const std::vector<std::vector<ClusterId>>& learned,
                              const std::vector<std::vector<ClusterId>>& truth,
                              std::size_t step_begin, std::size_t step_end) {
  Contingency c;
  for (std::size_t t = step_begin; t < step_end; ++t) {
    c.learned_ids.insert(c.learned_ids.end(), learned[t].begin(), learned[t].end());
    c.true_ids.insert(c.true_ids.end(), truth[t].begin(), truth[t].end());
  }
  auto dedup = [](std::vector<ClusterId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedup(c.learned_ids);
  dedup(c.true_ids);
  c.counts.assign(c.learned_ids.size(), std::vector<std::size_t>(c.true_ids.size(), 0));
  for (std::size_t t = step_begin; t < step_end; ++t)
    for (std::size_t i = 0; i < learned[t].size(); ++i)
      c.counts[c.learned_index(learned[t][i])][c.true_index(truth[t][i])] += 1;
  return c;
}

// learned id -> true id under the max-agreement one-to-one matching.
std::map<ClusterId, ClusterId> best_correspondence(const Contingency& c) {
  std::map<ClusterId, ClusterId> match;
  if (c.learned_ids.empty() || c.true_ids.empty()) return match;
  std::vector<std::vector<double>> neg(c.learned_ids.size(),
                                       std::vector<double>(c.true_ids.size()));
  for (std::size_t i = 0; i < c.counts.size(); ++i)
    for (std::size_t j = 0; j < c.counts[i].size(); ++j)
      neg[i][j] = -static_cast<double>(c.counts[i][j]);
  const Matching m = optimal_matching(neg);
  for (std::size_t i = 0; i < c.learned_ids.size(); ++i)
    if (m.assignment[i] >= 0)
      match[c.learned_ids[i]] = c.true_ids[static_cast<std::size_t>(m.assignment[i])];
  return match;
}

std::size_t agreements(const std::map<ClusterId, ClusterId>& match,
                       const std::vector<ClusterId>& learned,
                       const std::vector<ClusterId>& truth) {
  std::size_t agreed = 0;
  for (std::size_t i = 0; i < learned.size(); ++i) {
    auto it = match.find(learned[i]);
    if (it != match.end() && it->second == truth[i]) ++agreed;
  }
  return agreed;
}

}  // namespace

AccuracyReport tracked_accuracy(const std::vector<std::vector<ClusterId>>& learned,
                                const std::vector<std::vector<ClusterId>>& truth) {
  if (learned.size() != truth.size())
    throw std::invalid_argument("tracked_accuracy: step count mismatch");
  for (std::size_t t = 0; t < learned.size(); ++t)
    if (learned[t].size() != truth[t].size())
      throw std::invalid_argument("tracked_accuracy: point count mismatch at step " +
                                  std::to_string(t));

  AccuracyReport report;
  const std::size_t n_steps = learned.size();
  std::size_t total = 0;
  for (const auto& step : learned) total += step.size();

  const Contingency global = build_contingency(learned, truth, 0, n_steps);
  const auto global_match = best_correspondence(global);
  for (const auto& [lid, tid] : global_match)
    if (global.counts[global.learned_index(lid)][global.true_index(tid)] > 0)
      report.matched.emplace_back(lid, tid);

  std::size_t tracked_agreed = 0;
  std::size_t untracked_agreed = 0;
  for (std::size_t t = 0; t < n_steps; ++t) {
    AccuracyReport::Step row;
    row.step = t;
    row.points = learned[t].size();
    const std::size_t a_t = agreements(global_match, learned[t], truth[t]);
    tracked_agreed += a_t;
    const Contingency local = build_contingency(learned, truth, t, t + 1);
    const std::size_t b_t = agreements(best_correspondence(local), learned[t], truth[t]);
    untracked_agreed += b_t;
    if (row.points > 0) {
      row.tracked_acc = static_cast<double>(a_t) / static_cast<double>(row.points);
      row.untracked_acc = static_cast<double>(b_t) / static_cast<double>(row.points);
    }
    report.steps.push_back(row);
  }

  if (total == 0) {
    report.tracked = 1.0;
    report.untracked = 1.0;
  } else {
    report.tracked = static_cast<double>(tracked_agreed) / static_cast<double>(total);
    report.untracked = static_cast<double>(untracked_agreed) / static_cast<double>(total);
  }
  return report;
}

AccuracyReport tracked_accuracy(const SequenceResult& result,
                                const LabeledBatchSequence& truth) {
  std::vector<std::vector<ClusterId>> learned;
  learned.reserve(result.steps.size());
  for (const auto& step : result.steps) learned.push_back(step.labels);
  return tracked_accuracy(learned, truth.labels);
}

std::optional<double> weighted_accuracy(const std::vector<ClusterId>& labels,
                                        const std::vector<ClusterId>& truth_labels,
                                        const std::vector<double>& weights) {
  if (labels.size() != truth_labels.size() || labels.size() != weights.size())
    throw std::invalid_argument("weighted_accuracy: length mismatch");
  for (double w : weights)
    if (!(w >= 0.0 && w <= 1.0))
      throw std::invalid_argument("weighted_accuracy: weights must be in [0,1]");

  double total = 0.0;
  for (double w : weights) total += w;
  if (total == 0.0) return std::nullopt;

  // Weighted contingency, matched to maximize the weight of agreements.
  std::vector<ClusterId> lids = labels, tids = truth_labels;
  auto dedup = [](std::vector<ClusterId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedup(lids);
  dedup(tids);
  auto index_of = [](const std::vector<ClusterId>& v, ClusterId id) {
    return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), id) - v.begin());
  };
  std::vector<std::vector<double>> w_table(lids.size(), std::vector<double>(tids.size(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i)
    w_table[index_of(lids, labels[i])][index_of(tids, truth_labels[i])] += weights[i];

  std::vector<std::vector<double>> neg(lids.size(), std::vector<double>(tids.size()));
  for (std::size_t i = 0; i < lids.size(); ++i)
    for (std::size_t j = 0; j < tids.size(); ++j) neg[i][j] = -w_table[i][j];
  const Matching m = optimal_matching(neg);

  double agreed = 0.0;
  for (std::size_t i = 0; i < lids.size(); ++i)
    if (m.assignment[i] >= 0) agreed += w_table[i][static_cast<std::size_t>(m.assignment[i])];
  return agreed / total;
}

}  // namespace dynmeans
