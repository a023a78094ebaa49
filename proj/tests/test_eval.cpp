// Assignment matcher and the tracked/untracked accuracy metrics.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "dynmeans/eval.hpp"

using namespace dynmeans;

namespace {

// Exhaustive minimum over all injective row -> column assignments.
double brute_force_min_cost(const std::vector<std::vector<double>>& cost) {
  const std::size_t rows = cost.size();
  const std::size_t cols = cost.front().size();
  if (rows > cols) {
    std::vector<std::vector<double>> t(cols, std::vector<double>(rows));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) t[j][i] = cost[i][j];
    return brute_force_min_cost(t);
  }
  std::vector<int> cols_perm(cols);
  std::iota(cols_perm.begin(), cols_perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < rows; ++i) s += cost[i][static_cast<std::size_t>(cols_perm[i])];
    best = std::min(best, s);
  } while (std::next_permutation(cols_perm.begin(), cols_perm.end()));
  return best;
}

// Max total agreement over all injective learned -> true id maps.
std::size_t brute_force_max_agreement(const std::vector<std::vector<ClusterId>>& learned,
                                      const std::vector<std::vector<ClusterId>>& truth) {
  std::vector<ClusterId> lids, tids;
  for (const auto& step : learned) lids.insert(lids.end(), step.begin(), step.end());
  for (const auto& step : truth) tids.insert(tids.end(), step.begin(), step.end());
  auto dedup = [](std::vector<ClusterId>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  dedup(lids);
  dedup(tids);

  const bool swap_sides = lids.size() > tids.size();
  const auto& small = swap_sides ? tids : lids;
  const auto& large = swap_sides ? lids : tids;
  std::vector<int> pick(large.size());
  std::iota(pick.begin(), pick.end(), 0);
  std::size_t best = 0;
  do {
    std::map<ClusterId, ClusterId> l2t;
    for (std::size_t i = 0; i < small.size(); ++i) {
      if (swap_sides)
        l2t[large[static_cast<std::size_t>(pick[i])]] = small[i];
      else
        l2t[small[i]] = large[static_cast<std::size_t>(pick[i])];
    }
    std::size_t agreed = 0;
    for (std::size_t t = 0; t < learned.size(); ++t)
      for (std::size_t i = 0; i < learned[t].size(); ++i) {
        auto it = l2t.find(learned[t][i]);
        if (it != l2t.end() && it->second == truth[t][i]) ++agreed;
      }
    best = std::max(best, agreed);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

}  // namespace

TEST_CASE("optimal_matching: small exact cases") {
  auto m = optimal_matching({{1.0, 2.0}, {2.0, 1.0}});
  CHECK(m.assignment == std::vector<int>{0, 1});
  CHECK(m.cost == 2.0);

  m = optimal_matching({{0.0, 9.0}, {9.0, 0.0}});
  CHECK(m.assignment == std::vector<int>{0, 1});
  CHECK(m.cost == 0.0);

  m = optimal_matching({{5.0}});
  CHECK(m.assignment == std::vector<int>{0});
  CHECK(m.cost == 5.0);

  m = optimal_matching({});
  CHECK(m.assignment.empty());
  CHECK(m.cost == 0.0);
}

TEST_CASE("optimal_matching: rectangular leaves the surplus side unmatched") {
  // 3 rows, 2 columns: exactly one row stays at -1
  auto m = optimal_matching({{1.0, 8.0}, {8.0, 1.0}, {0.5, 0.5}});
  REQUIRE(m.assignment.size() == 3);
  CHECK(std::count(m.assignment.begin(), m.assignment.end(), -1) == 1);
  CHECK(m.cost == brute_force_min_cost({{1.0, 8.0}, {8.0, 1.0}, {0.5, 0.5}}));
}

TEST_CASE("optimal_matching: input validation") {
  CHECK_THROWS_AS(optimal_matching({{1.0, 2.0}, {1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(optimal_matching({{std::numeric_limits<double>::infinity()}}),
                  std::invalid_argument);
}

TEST_CASE("optimal_matching agrees with exhaustive search") {
  std::mt19937_64 rng(20240);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_int_distribution<int> entry(0, 99);  // integers keep sums exact
  for (int trial = 0; trial < 300; ++trial) {
    const int r = dim(rng), c = dim(rng);
    std::vector<std::vector<double>> cost(r, std::vector<double>(c));
    for (auto& row : cost)
      for (auto& x : row) x = static_cast<double>(entry(rng));
    auto m = optimal_matching(cost);
    REQUIRE(m.cost == brute_force_min_cost(cost));

    // assignment is injective and covers the smaller side
    std::vector<int> used;
    for (int a : m.assignment)
      if (a >= 0) used.push_back(a);
    std::sort(used.begin(), used.end());
    REQUIRE(std::adjacent_find(used.begin(), used.end()) == used.end());
    REQUIRE(used.size() == static_cast<std::size_t>(std::min(r, c)));
  }
}

TEST_CASE("tracked_accuracy: perfect labeling up to id permutation scores 1") {
  std::vector<std::vector<ClusterId>> truth{{1, 1, 2, 2}, {1, 2, 2, 3}};
  std::vector<std::vector<ClusterId>> learned{{9, 9, 4, 4}, {9, 4, 4, 7}};
  auto rep = tracked_accuracy(learned, truth);
  CHECK(rep.tracked == 1.0);
  CHECK(rep.untracked == 1.0);
  // matched pairs carry the permutation
  std::map<ClusterId, ClusterId> got(rep.matched.begin(), rep.matched.end());
  CHECK(got.at(9) == 1);
  CHECK(got.at(4) == 2);
  CHECK(got.at(7) == 3);
}

TEST_CASE("tracked_accuracy: cross-step id swap halves tracked, untracked intact") {
  std::vector<std::vector<ClusterId>> truth{{1, 1, 2, 2}, {1, 1, 2, 2}};
  std::vector<std::vector<ClusterId>> learned{{5, 5, 6, 6}, {6, 6, 5, 5}};
  auto rep = tracked_accuracy(learned, truth);
  CHECK(rep.untracked == 1.0);
  CHECK(rep.tracked == 0.5);
  REQUIRE(rep.steps.size() == 2);
  // the single global correspondence can only honor one of the two steps;
  // which one wins the tie is up to the matcher
  std::multiset<double> per_step;
  for (const auto& s : rep.steps) {
    CHECK(s.untracked_acc == 1.0);
    CHECK(s.points == 4);
    per_step.insert(s.tracked_acc);
  }
  CHECK(per_step == std::multiset<double>{0.0, 1.0});
}

TEST_CASE("tracked_accuracy: one blob against two equal truth clusters scores half") {
  std::vector<std::vector<ClusterId>> truth{{1, 1, 2, 2}};
  std::vector<std::vector<ClusterId>> learned{{0, 0, 0, 0}};
  auto rep = tracked_accuracy(learned, truth);
  CHECK(rep.tracked == 0.5);
  CHECK(rep.untracked == 0.5);
}

TEST_CASE("tracked_accuracy: degenerate shapes") {
  auto rep = tracked_accuracy(std::vector<std::vector<ClusterId>>{},
                              std::vector<std::vector<ClusterId>>{});
  CHECK(rep.tracked == 1.0);
  CHECK(rep.untracked == 1.0);

  using Labels = std::vector<std::vector<ClusterId>>;
  CHECK_THROWS_AS(tracked_accuracy(Labels{{1}}, Labels{{1}, {2}}), std::invalid_argument);
  CHECK_THROWS_AS(tracked_accuracy(Labels{{1, 2}}, Labels{{1}}), std::invalid_argument);
}

TEST_CASE("tracked_accuracy equals exhaustive matching on small instances") {
  std::mt19937_64 rng(314);
  std::uniform_int_distribution<int> steps_dist(1, 3);
  std::uniform_int_distribution<int> pts_dist(2, 12);
  std::uniform_int_distribution<int> pool_dist(1, 4);
  for (int trial = 0; trial < 150; ++trial) {
    const int steps = steps_dist(rng);
    const int l_pool = pool_dist(rng), t_pool = pool_dist(rng);
    std::vector<std::vector<ClusterId>> learned(steps), truth(steps);
    std::size_t total = 0;
    for (int t = 0; t < steps; ++t) {
      const int n = pts_dist(rng);
      total += static_cast<std::size_t>(n);
      for (int i = 0; i < n; ++i) {
        learned[t].push_back(std::uniform_int_distribution<int>(100, 99 + l_pool)(rng));
        truth[t].push_back(std::uniform_int_distribution<int>(1, t_pool)(rng));
      }
    }
    auto rep = tracked_accuracy(learned, truth);
    const auto best = brute_force_max_agreement(learned, truth);
    REQUIRE(rep.tracked == static_cast<double>(best) / static_cast<double>(total));
    REQUIRE(rep.tracked <= rep.untracked);
    for (const auto& s : rep.steps) REQUIRE(s.tracked_acc <= s.untracked_acc);
  }
}

TEST_CASE("tracked_accuracy: invariant under any bijective relabeling") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::vector<ClusterId>> learned(3), truth(3);
    for (int t = 0; t < 3; ++t)
      for (int i = 0; i < 20; ++i) {
        learned[t].push_back(std::uniform_int_distribution<int>(0, 5)(rng));
        truth[t].push_back(std::uniform_int_distribution<int>(0, 5)(rng));
      }
    auto base = tracked_accuracy(learned, truth);

    std::vector<ClusterId> remap{0, 1, 2, 3, 4, 5};
    std::shuffle(remap.begin(), remap.end(), rng);
    auto shuffled = learned;
    for (auto& step : shuffled)
      for (auto& id : step) id = 1000 + remap[static_cast<std::size_t>(id)];
    auto rep = tracked_accuracy(shuffled, truth);
    REQUIRE(rep.tracked == base.tracked);
    REQUIRE(rep.untracked == base.untracked);
  }
}

TEST_CASE("tracked_accuracy: truth against itself is exactly 1") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<ClusterId>> truth(4);
    for (auto& step : truth)
      for (int i = 0; i < 25; ++i)
        step.push_back(std::uniform_int_distribution<int>(0, 7)(rng));
    auto rep = tracked_accuracy(truth, truth);
    REQUIRE(rep.tracked == 1.0);
    REQUIRE(rep.untracked == 1.0);
  }
}

TEST_CASE("weighted_accuracy") {
  SUBCASE("all weights one reduces to the plain metric") {
    auto acc = weighted_accuracy({0, 0, 1}, {5, 5, 5}, {1.0, 1.0, 1.0});
    REQUIRE(acc.has_value());
    CHECK(*acc == doctest::Approx(2.0 / 3.0));
  }

  SUBCASE("zero-weight points cannot move the score") {
    auto with = weighted_accuracy({0, 0, 1, 1}, {5, 5, 5, 5}, {1.0, 1.0, 0.0, 0.0});
    REQUIRE(with.has_value());
    CHECK(*with == 1.0);
  }

  SUBCASE("fractional weights") {
    // first two correct under the optimal correspondence: (1 + 0.5)/2
    auto acc = weighted_accuracy({0, 0, 0}, {5, 5, 6}, {1.0, 0.5, 0.5});
    REQUIRE(acc.has_value());
    CHECK(*acc == 0.75);
  }

  SUBCASE("degenerate and invalid inputs") {
    CHECK(!weighted_accuracy({0, 1}, {0, 1}, {0.0, 0.0}).has_value());
    CHECK_THROWS_AS(weighted_accuracy({0}, {0, 1}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_accuracy({0}, {0}, {1.5}), std::invalid_argument);
    CHECK_THROWS_AS(weighted_accuracy({0}, {0}, {-0.1}), std::invalid_argument);
  }
}
