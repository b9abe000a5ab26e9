#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dagsample/estimators.hpp"
#include "dagsample/oracle.hpp"
#include "testutil.hpp"

using namespace dagsample;

namespace {

DdsSample make_sample(int n, std::vector<NodeSet> parents, double log_joint,
                      std::uint64_t draw_index) {
  DdsSample s;
  s.dag.n = n;
  s.dag.parents = std::move(parents);
  s.log_joint = log_joint;
  s.draw_index = draw_index;
  return s;
}

FamilyScoreTable beta_for(const Dataset& d, ScoreFamily family, int k) {
  ScoreConfig cfg = ScoreConfig::defaults_for(family);
  cfg.max_indegree = k;
  return build_beta_tables(d, cfg);
}

}  // namespace

TEST_CASE("deduplication keeps first-draw order and true multiplicities") {
  const DdsSample a = make_sample(2, {0, 0}, std::log(0.2), 4);       // empty
  const DdsSample b = make_sample(2, {0, 1}, std::log(0.3), 2);       // 0 -> 1
  const DdsSample c = make_sample(2, {2, 0}, std::log(0.5), 1);       // 1 -> 0
  const DdsSample a2 = make_sample(2, {0, 0}, std::log(0.2), 7);
  const DdsSample a3 = make_sample(2, {0, 0}, std::log(0.2), 3);

  // Processing order scrambled relative to draw order on purpose.
  const UniqueDagSet u = dedupe_samples({a, b, a2, c, a3});
  CHECK(u.total_draws == 5);
  REQUIRE(u.items.size() == 3);
  // First-draw order: c (draw 1), b (draw 2), a (draw 3).
  CHECK(u.items[0].dag == c.dag);
  CHECK(u.items[1].dag == b.dag);
  CHECK(u.items[2].dag == a.dag);
  CHECK(u.items[0].multiplicity == 1);
  CHECK(u.items[1].multiplicity == 1);
  CHECK(u.items[2].multiplicity == 3);
  // Captured mass counts each distinct DAG once, whatever its multiplicity.
  CHECK(u.log_total_weight == doctest::Approx(std::log(1.0)).epsilon(1e-12));
}

TEST_CASE("the accumulator is prefix-stable under further draws") {
  DagAccumulator acc;
  acc.add(make_sample(2, {0, 1}, std::log(0.3), 0));
  acc.add(make_sample(2, {0, 0}, std::log(0.2), 1));
  const UniqueDagSet first = acc.snapshot();
  acc.add(make_sample(2, {0, 1}, std::log(0.3), 2));
  acc.add(make_sample(2, {2, 0}, std::log(0.5), 3));
  const UniqueDagSet second = acc.snapshot();
  REQUIRE(first.items.size() == 2);
  REQUIRE(second.items.size() == 3);
  for (std::size_t i = 0; i < first.items.size(); ++i) {
    CHECK(second.items[i].dag == first.items[i].dag);
    CHECK(second.items[i].log_joint == first.items[i].log_joint);
  }
  CHECK(second.log_total_weight >= first.log_total_weight);
  CHECK(second.total_draws == 4);
}

TEST_CASE("weighted point estimates and enclosures by hand") {
  const UniqueDagSet u = dedupe_samples({
      make_sample(2, {0, 0}, std::log(0.2), 0),
      make_sample(2, {0, 1}, std::log(0.3), 1),
      make_sample(2, {2, 0}, std::log(0.5), 2),
  });
  const FeaturePtr e01 = FeatureExpr::edge(0, 1);

  // Captured mass 1.0 of a true total of 2.0.
  const FeatureEstimate est = estimate_feature_iw(u, *e01, std::log(2.0));
  CHECK(est.point == doctest::Approx(0.3).epsilon(1e-12));
  REQUIRE(est.delta.has_value());
  CHECK(*est.delta == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(est.interval.has_value());
  CHECK(est.interval->first == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(est.interval->second == doctest::Approx(0.65).epsilon(1e-12));
  CHECK_FALSE(est.delta_clamped);
  CHECK(est.draws == 3);
  CHECK(est.unique_dags == 3);

  const FeatureEstimate rest =
      estimate_feature_iw(u, *FeatureExpr::logical_not(e01), std::log(2.0));
  CHECK(rest.point == doctest::Approx(0.7).epsilon(1e-12));

  // Without the evidence there is no enclosure.
  const FeatureEstimate bare = estimate_feature_iw(u, *e01, std::nullopt);
  CHECK_FALSE(bare.delta.has_value());
  CHECK_FALSE(bare.interval.has_value());
  CHECK(bare.point == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("a rounding-inflated captured mass is clamped and flagged") {
  const UniqueDagSet u = dedupe_samples({
      make_sample(2, {0, 0}, std::log(0.6), 0),
      make_sample(2, {0, 1}, std::log(0.4), 1),
  });
  // Claimed evidence below the captured mass: delta would be 1/0.9 > 1.
  const FeatureEstimate est =
      estimate_feature_iw(u, *FeatureExpr::edge(0, 1), std::log(0.9));
  CHECK(est.delta_clamped);
  REQUIRE(est.delta.has_value());
  CHECK(*est.delta == 1.0);
  REQUIRE(est.interval.has_value());
  CHECK(est.interval->first == doctest::Approx(est.point).epsilon(1e-12));
  CHECK(est.interval->second == doctest::Approx(est.point).epsilon(1e-12));
}

TEST_CASE("empty inputs are rejected") {
  CHECK_THROWS_AS(estimate_edges_iw(UniqueDagSet{}), std::invalid_argument);
  CHECK_THROWS_AS(estimate_feature_frequency({}, *FeatureExpr::edge(0, 1)),
                  std::invalid_argument);
  DpTables dp;
  CHECK_THROWS_AS(estimate_edges_order_mean(dp, {}), std::invalid_argument);
}

TEST_CASE("the enclosure brackets the exact posterior on a real run") {
  const Dataset d = testutil::random_binary_dataset(4, 60, 71);
  const FamilyScoreTable beta = beta_for(d, ScoreFamily::kK2, 3);
  const DpTables dp = build_dp_tables(beta);
  const double evidence = log_structure_evidence(beta);

  DdsConfig cfg;
  cfg.n_orders = 500;
  cfg.seed = 31;
  const DdsRun run = run_dds(beta, dp, cfg);
  const UniqueDagSet u = dedupe_samples(run.samples);

  const std::vector<FeaturePtr> features = {
      FeatureExpr::edge(0, 1),
      FeatureExpr::path(0, 3),
      FeatureExpr::path_len(0, 3, 2),
      FeatureExpr::logical_and(FeatureExpr::path(0, 1), FeatureExpr::path(1, 2)),
      FeatureExpr::logical_not(FeatureExpr::path(0, 2)),
      FeatureExpr::parent_set_is(3, 0b0011u),
  };
  for (const FeaturePtr& f : features) {
    const FeatureEstimate est = estimate_feature_iw(u, *f, evidence);
    REQUIRE(est.interval.has_value());
    const double exact = exact_feature_posterior_structure(beta, *f);
    CHECK(est.interval->first <= exact + 1e-9);
    CHECK(est.interval->second >= exact - 1e-9);
    CHECK(est.point >= 0.0);
    CHECK(est.point <= 1.0);
    REQUIRE(est.delta.has_value());
    CHECK(*est.delta > 0.0);
    CHECK(*est.delta <= 1.0);
  }
}

TEST_CASE("the edge matrix agrees with per-feature estimates") {
  const Dataset d = testutil::random_binary_dataset(4, 40, 73);
  const FamilyScoreTable beta = beta_for(d, ScoreFamily::kBdeu, 2);
  const DpTables dp = build_dp_tables(beta);
  DdsConfig cfg;
  cfg.n_orders = 300;
  cfg.seed = 37;
  const UniqueDagSet u = dedupe_samples(run_dds(beta, dp, cfg).samples);
  const auto edges = estimate_edges_iw(u);
  for (int child = 0; child < 4; ++child)
    for (int parent = 0; parent < 4; ++parent) {
      if (child == parent) {
        CHECK(edges[static_cast<std::size_t>(child)][static_cast<std::size_t>(parent)] == 0.0);
        continue;
      }
      const FeatureEstimate est =
          estimate_feature_iw(u, *FeatureExpr::edge(parent, child), std::nullopt);
      CHECK(edges[static_cast<std::size_t>(child)][static_cast<std::size_t>(parent)] ==
            doctest::Approx(est.point).epsilon(1e-10));
    }
}

TEST_CASE("the raw frequency estimator tracks the order-weighted posterior") {
  const Dataset d = testutil::random_binary_dataset(3, 50, 79);
  const FamilyScoreTable beta = beta_for(d, ScoreFamily::kK2, 2);
  const DpTables dp = build_dp_tables(beta);
  DdsConfig cfg;
  cfg.n_orders = 4000;
  cfg.seed = 41;
  const DdsRun run = run_dds(beta, dp, cfg);
  const FeaturePtr f = FeatureExpr::edge(0, 1);
  const double freq = estimate_feature_frequency(run.samples, *f);
  const double exact = exact_feature_posterior_order(beta, *f);
  CHECK(std::abs(freq - exact) < 0.03);
}

TEST_CASE("the order-averaged edge estimator is exact per order") {
  const Dataset d = testutil::random_binary_dataset(4, 30, 83);
  const FamilyScoreTable beta = beta_for(d, ScoreFamily::kK2, 2);
  const DpTables dp = build_dp_tables(beta);
  TotalOrder order;
  order.sigma = {3, 1, 0, 2};
  const auto mat = estimate_edges_order_mean(dp, {order});
  for (int pos = 0; pos < 4; ++pos) {
    const int i = order.sigma[static_cast<std::size_t>(pos)];
    const NodeSet u = order.predecessors(pos);
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      const double expected =
          contains(u, j) ? edge_posterior_in_order(dp, j, i, u) : 0.0;
      CHECK(mat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("the order-averaged edge estimator converges to the exact matrix") {
  const Dataset d = testutil::random_binary_dataset(3, 60, 89);
  const FamilyScoreTable beta = beta_for(d, ScoreFamily::kBdeu, 2);
  const DpTables dp = build_dp_tables(beta);
  DdsConfig cfg;
  cfg.n_orders = 4000;
  cfg.seed = 43;
  const DdsRun run = run_dds(beta, dp, cfg);
  const auto mean = estimate_edges_order_mean(dp, run.orders);
  const auto exact = exact_edge_posteriors(beta, dp);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(mean[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                     exact[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) < 0.03);
}
