// Sequential driver: reparameterization, dormant-record bookkeeping, restarts.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "dynmeans/pipeline.hpp"

using namespace dynmeans;

TEST_CASE("reparameterize maps (lambda, n_q, k_tau) onto (lambda, q, tau)") {
  SUBCASE("benchmark operating point") {
    auto p = reparameterize({0.04, 6.8, 1.01});
    CHECK(p.lambda == 0.04);
    CHECK(p.q_penalty == 0.04 / 6.8);
    CHECK(p.q_penalty == doctest::Approx(0.00588235).epsilon(1e-6));
    CHECK(p.tau == (6.8 * 0.01 + 1.0) / 5.8);
    CHECK(p.tau == doctest::Approx(0.18413793).epsilon(1e-6));
  }

  SUBCASE("k_tau = 1 collapses tau to 1/(n_q - 1)") {
    for (double n_q : {1.5, 2.0, 5.0, 100.0}) {
      auto p = reparameterize({1.0, n_q, 1.0});
      CHECK(p.tau == 1.0 / (n_q - 1.0));
    }
  }

  SUBCASE("round numbers") {
    auto p = reparameterize({1.0, 2.0, 2.0});
    CHECK(p.q_penalty == 0.5);
    CHECK(p.tau == 3.0);
  }

  SUBCASE("domain errors") {
    CHECK_THROWS_AS(reparameterize({1.0, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(reparameterize({1.0, 2.0, 0.99}), std::invalid_argument);
    CHECK_THROWS_AS(reparameterize({0.0, 2.0, 1.0}), std::invalid_argument);
  }
}

TEST_CASE("update_c ages the unrevived and dormants every active cluster at age 1") {
  ActiveCluster a;
  a.id = 0;
  a.center = {1.0, 1.0};
  a.weight = 2.0;
  a.age = 0;

  SUBCASE("single active, no old") {
    auto next = update_c({a}, {});
    REQUIRE(next.size() == 1);
    CHECK(next[0].id == 0);
    CHECK(next[0].age == 1);
    CHECK(next[0].center == Point{1.0, 1.0});
    CHECK(next[0].weight == 2.0);
  }

  SUBCASE("pure aging") {
    auto next = update_c({}, {OldClusterRecord{1, 3, {0.5}, 1.0}});
    REQUIRE(next.size() == 1);
    CHECK(next[0].age == 4);
  }

  SUBCASE("mixed, sorted by id") {
    auto next = update_c({a}, {OldClusterRecord{1, 1, {0.5, 0.5}, 1.0}});
    REQUIRE(next.size() == 2);
    CHECK(next[0].id == 0);
    CHECK(next[0].age == 1);
    CHECK(next[1].id == 1);
    CHECK(next[1].age == 2);
  }
}

TEST_CASE("prune_unrevivable drops only strictly hopeless records") {
  DynMeansParams params{1.0, 0.5, 0.0};
  std::vector<OldClusterRecord> recs{
      {0, 1, {0.0}, 1.0}, {1, 2, {0.0}, 1.0}, {2, 3, {0.0}, 1.0}};
  auto kept = prune_unrevivable(recs, params);
  REQUIRE(kept.size() == 2);  // age 2 sits exactly on the boundary and survives
  CHECK(kept[0].id == 0);
  CHECK(kept[1].id == 1);
}

TEST_CASE("make_scan_order: valid permutation, reproducible, varies with inputs") {
  auto order = make_scan_order(50, 42, 3, 1);
  auto sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);

  CHECK(make_scan_order(50, 42, 3, 1) == order);
  CHECK(make_scan_order(50, 42, 3, 2) != order);
  CHECK(make_scan_order(50, 42, 4, 1) != order);
  CHECK(make_scan_order(50, 43, 3, 1) != order);
  CHECK(make_scan_order(0, 1, 0, 0).empty());
}

TEST_CASE("run_sequence: single batch equals one timestep call") {
  Batch batch{{0.0, 0.0}, {0.1, 0.0}, {5.0, 5.0}};
  auto cfg = RunConfig::from_params({1.0, 0.5, 0.2}, 1, 7);
  auto seq = run_sequence({batch}, cfg);

  const auto order = make_scan_order(batch.size(), cfg.seed, 0, 0);
  auto direct = cluster_timestep(batch, {}, cfg.params, order, cfg.max_iters, 0);

  REQUIRE(seq.steps.size() == 1);
  CHECK(seq.steps[0].labels == direct.labels.ids);
  CHECK(seq.steps[0].cost == direct.cost);
  CHECK(seq.steps[0].iterations == direct.iterations);
  REQUIRE(seq.steps[0].clusters.size() == direct.active.size());
  for (std::size_t k = 0; k < direct.active.size(); ++k) {
    CHECK(seq.steps[0].clusters[k].id == direct.active[k].id);
    CHECK(seq.steps[0].clusters[k].center == direct.active[k].center);
  }
  CHECK(seq.steps[0].restart_costs == std::vector<double>{direct.cost});
}

TEST_CASE("run_sequence: empty second batch keeps records aging") {
  Batch b1{{0.0, 0.0}, {0.05, 0.0}};
  auto cfg = RunConfig::from_params({1.0, 0.1, 0.1}, 1, 3);
  auto seq = run_sequence({b1, {}, b1}, cfg);

  REQUIRE(seq.steps.size() == 3);
  CHECK(seq.steps[1].labels.empty());
  CHECK(seq.steps[1].converged);
  CHECK(seq.steps[1].cost == 0.0);
  // the cluster from step 0 comes back at step 2 under the same id
  CHECK(seq.steps[2].labels == seq.steps[0].labels);
  REQUIRE(seq.genealogy.count(0) == 1);
  CHECK(seq.genealogy.at(0).birth_step == 0);
  CHECK(seq.genealogy.at(0).observed_steps == std::vector<std::size_t>{0, 2});
}

TEST_CASE("run_sequence: revival after dormancy keeps the original id") {
  Batch home{{0.0, 0.0}, {0.02, 0.0}, {0.0, 0.02}};
  Batch away{{5.0, 5.0}, {5.02, 5.0}, {5.0, 5.02}};
  auto cfg = RunConfig::from_params({1.0, 0.05, 0.1}, 1, 11);
  auto seq = run_sequence({home, away, home}, cfg);

  REQUIRE(seq.steps.size() == 3);
  const auto& first = seq.steps[0].labels;
  const auto& third = seq.steps[2].labels;
  CHECK(first == third);
  CHECK(seq.steps[1].labels[0] != first[0]);
  // a revived cluster carries its dormancy age through the timestep; a
  // fresh cluster would sit at age 0
  REQUIRE(seq.steps[2].clusters.size() == 1);
  CHECK(seq.steps[2].clusters[0].id == first[0]);
  CHECK(seq.steps[2].clusters[0].age == 2);
  CHECK(seq.genealogy.at(first[0]).observed_steps ==
        std::vector<std::size_t>{0, 2});
}

TEST_CASE("run_sequence: winning restart dominates every restart") {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::vector<Batch> batches;
  for (int t = 0; t < 4; ++t) {
    Batch b;
    for (int i = 0; i < 40; ++i) b.push_back({coord(rng), coord(rng)});
    batches.push_back(std::move(b));
  }
  auto cfg = RunConfig::from_reparam({0.1, 4.0, 1.1}, 5, 21);
  auto seq = run_sequence(batches, cfg);
  for (const auto& step : seq.steps) {
    REQUIRE(step.restart_costs.size() == 5);
    const double lo = *std::min_element(step.restart_costs.begin(), step.restart_costs.end());
    CHECK(step.cost == lo);
    for (double c : step.restart_costs) CHECK(step.cost <= c);
  }
}

TEST_CASE("run_sequence: reruns are identical") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  std::vector<Batch> batches;
  for (int t = 0; t < 5; ++t) {
    Batch b;
    for (int i = 0; i < 30; ++i) b.push_back({coord(rng), coord(rng)});
    batches.push_back(std::move(b));
  }
  auto cfg = RunConfig::from_reparam({0.08, 6.8, 1.01}, 3, 99);
  auto a = run_sequence(batches, cfg);
  auto b = run_sequence(batches, cfg);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    CHECK(a.steps[t].labels == b.steps[t].labels);
    CHECK(a.steps[t].cost == b.steps[t].cost);
    CHECK(a.steps[t].restart_costs == b.steps[t].restart_costs);
  }
}

TEST_CASE("run_sequence: input validation") {
  auto cfg = RunConfig::from_params({1.0, 1.0, 0.0}, 1, 0);
  CHECK_THROWS_AS(run_sequence({{{0.0, 0.0}}, {{1.0}}}, cfg), std::invalid_argument);
  CHECK_THROWS_AS(
      run_sequence({{{0.0, std::numeric_limits<double>::infinity()}}}, cfg),
      std::invalid_argument);
  cfg.restarts = 0;
  CHECK_THROWS_AS(run_sequence({{{0.0}}}, cfg), std::invalid_argument);
}

TEST_CASE("run_sequence: max_iters 1 marks the run unconverged") {
  Batch b{{0.0}, {0.4}, {0.8}, {10.0}};
  auto cfg = RunConfig::from_params({1.0, 1.0, 0.0}, 1, 0, 1);
  auto seq = run_sequence({b}, cfg);
  CHECK(!seq.all_converged);
  CHECK(!seq.steps[0].converged);
  CHECK(seq.steps[0].iterations == 1);
}

TEST_CASE("never-revive bound: past the dormancy horizon a record is dead weight") {
  // age*Q > lambda makes revival strictly dearer than a new cluster even at
  // distance zero.
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> lam_dist(0.02, 5.0);
  std::uniform_real_distribution<double> nq_dist(1.2, 12.0);
  std::uniform_real_distribution<double> kt_dist(1.0, 2.5);
  for (int trial = 0; trial < 50; ++trial) {
    ReparamConfig rc{lam_dist(rng), nq_dist(rng), kt_dist(rng)};
    auto params = reparameterize(rc);
    int age = static_cast<int>(std::floor(rc.n_q)) + 1;
    REQUIRE(age * params.q_penalty > params.lambda);

    OldClusterRecord rec{0, age, {0.25, 0.75}, 4.0};
    CHECK(label_cost(rec.center, rec, params) > params.lambda);

    Batch batch{rec.center};  // distance zero; still refuses to revive
    std::vector<ActiveCluster> active;
    std::vector<OldClusterRecord> old{rec};
    ClusterId next_id = 1;
    std::vector<int> order{0};
    auto labels = assign_labels(batch, active, old, params, order, next_id);
    CHECK(labels.kinds[0] == Decision::kCreatedNew);
  }
}

TEST_CASE("revival boundary: costs cross at k_tau*lambda after one dormant step") {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> lam_dist(0.01, 5.0);
  std::uniform_real_distribution<double> nq_dist(1.1, 15.0);
  std::uniform_real_distribution<double> kt_dist(1.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    ReparamConfig rc{lam_dist(rng), nq_dist(rng), kt_dist(rng)};
    auto params = reparameterize(rc);
    OldClusterRecord rec{0, 1, {0.0, 0.0}, 2.0};
    const Point y{std::sqrt(rc.k_tau * rc.lambda), 0.0};
    const double revive = label_cost(y, rec, params);
    CHECK(std::abs(revive - params.lambda) <=
          1e-9 * std::max(params.lambda, revive));
  }
}
