#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "dagsample/scores.hpp"
#include "testutil.hpp"

using namespace dagsample;

namespace {

ScoreConfig k2_config(int k) {
  ScoreConfig cfg = ScoreConfig::defaults_for(ScoreFamily::kK2);
  cfg.max_indegree = k;
  return cfg;
}

ScoreConfig bdeu_config(int k, double ess = 1.0) {
  ScoreConfig cfg = ScoreConfig::defaults_for(ScoreFamily::kBdeu);
  cfg.max_indegree = k;
  cfg.ess = ess;
  return cfg;
}

}  // namespace

TEST_CASE("K2 marginal likelihood on a two-row binary column") {
  // One binary variable observed as {0, 1}:
  // (r-1)! / (m+r-1)! * prod N_k! = 1! / 3! * 1 * 1 = 1/6.
  const Dataset d = testutil::make_dataset(2, {{0, 0}, {1, 1}});
  CHECK(local_score(d, k2_config(1), 0, 0) ==
        doctest::Approx(std::log(1.0 / 6.0)).epsilon(1e-12));
}

TEST_CASE("K2 with one parent multiplies per-configuration factors") {
  // Child X1 with parent X0; rows (0,0),(0,1),(1,0):
  // config x0=0: counts (1,1) -> 1!/3! = 1/6; config x0=1: counts (1,0)
  // -> 1!/2! = 1/2.  Total log = log(1/12).
  const Dataset d = testutil::make_dataset(2, {{0, 0}, {0, 1}, {1, 0}});
  CHECK(local_score(d, k2_config(1), 1, 0b01u) ==
        doctest::Approx(std::log(1.0 / 12.0)).epsilon(1e-12));
}

TEST_CASE("BDeu marginal likelihood on a two-row binary column") {
  // ess 1, no parents: alpha_j = 1, alpha_jk = 1/2, counts (1,1):
  // Gamma(1)/Gamma(3) * [Gamma(3/2)/Gamma(1/2)]^2 = 1/2 * 1/4 = 1/8.
  const Dataset d = testutil::make_dataset(2, {{0, 0}, {1, 1}});
  CHECK(local_score(d, bdeu_config(1), 0, 0) ==
        doctest::Approx(std::log(1.0 / 8.0)).epsilon(1e-12));
}

TEST_CASE("BDeu splits ess across parent configurations") {
  // Child X1 (binary), parent X0 (binary), ess = 2: q = 2, alpha_j = 1,
  // alpha_jk = 1/2.  Rows (0,0),(0,1),(1,1):
  // config 0: counts (1,1) -> 1/2 * [G(1.5)/G(.5)]^2 = 1/8;
  // config 1: counts (0,1) -> G(1)/G(2) * G(1.5)/G(.5) = 1/2.
  const Dataset d = testutil::make_dataset(2, {{0, 0}, {0, 1}, {1, 1}});
  CHECK(local_score(d, bdeu_config(1, 2.0), 1, 0b01u) ==
        doctest::Approx(std::log(1.0 / 16.0)).epsilon(1e-12));
}

TEST_CASE("scores depend only on the family's columns") {
  const Dataset d1 = testutil::make_dataset(3, {{0, 0, 0}, {1, 1, 0}, {0, 1, 1}});
  // Same X0, X1; different X2.
  const Dataset d2 = testutil::make_dataset(3, {{0, 0, 1}, {1, 1, 1}, {0, 1, 0}});
  for (const ScoreConfig& cfg : {k2_config(2), bdeu_config(2)}) {
    CHECK(local_score(d1, cfg, 1, 0b001u) ==
          doctest::Approx(local_score(d2, cfg, 1, 0b001u)).epsilon(1e-14));
  }
}

TEST_CASE("empty datasets score zero (everything marginalizes away)") {
  Dataset d = testutil::make_dataset(2, {{0, 0}, {1, 1}});
  d.rows.clear();
  CHECK(local_score(d, k2_config(1), 0, 0) == 0.0);
  CHECK(local_score(d, bdeu_config(1), 1, 0b01u) == 0.0);
}

TEST_CASE("rho factors") {
  ScoreConfig cfg;
  cfg.rho_mode = RhoMode::kUniform;
  CHECK(log_rho(cfg, 10, 3) == 0.0);
  cfg.rho_mode = RhoMode::kInvBinomial;
  CHECK(log_rho(cfg, 10, 3) == doctest::Approx(-std::log(84.0)).epsilon(1e-12));
  CHECK(log_rho(cfg, 10, 0) == doctest::Approx(0.0));
}

TEST_CASE("default score/prior pairings") {
  const ScoreConfig k2 = ScoreConfig::defaults_for(ScoreFamily::kK2);
  CHECK(k2.rho_mode == RhoMode::kInvBinomial);
  const ScoreConfig bdeu = ScoreConfig::defaults_for(ScoreFamily::kBdeu);
  CHECK(bdeu.rho_mode == RhoMode::kUniform);
  CHECK(bdeu.ess == 1.0);
}

TEST_CASE("beta tables match direct scoring, entries beyond k are -inf") {
  const Dataset d = testutil::random_binary_dataset(4, 25, 3);
  for (const ScoreConfig& cfg : {k2_config(2), bdeu_config(2)}) {
    const FamilyScoreTable beta = build_beta_tables(d, cfg);
    CHECK(beta.n == 4);
    CHECK(beta.max_indegree == 2);
    for (int i = 0; i < 4; ++i) {
      testutil::plain_subsets_up_to(without_bit(full_set(4), i), 3, [&](NodeSet pa) {
        const double got = beta.log_beta_at(i, pa);
        if (popcount(pa) > 2) {
          CHECK(got == kNegInf);
        } else {
          CHECK(got == doctest::Approx(log_rho(cfg, 4, popcount(pa)) +
                                       local_score(d, cfg, i, pa))
                           .epsilon(1e-14));
        }
      });
    }
  }
}

TEST_CASE("beta tables identical under multiple workers") {
  const Dataset d = testutil::random_binary_dataset(5, 40, 11);
  const FamilyScoreTable one = build_beta_tables(d, k2_config(3), 1);
  const FamilyScoreTable three = build_beta_tables(d, k2_config(3), 3);
  CHECK(one.log_beta == three.log_beta);
}

TEST_CASE("structure joint sums family entries") {
  const Dataset d = testutil::random_binary_dataset(3, 15, 5);
  const FamilyScoreTable beta = build_beta_tables(d, k2_config(2));
  Dag g(3);
  g.parents = {0b000u, 0b001u, 0b011u};
  CHECK(beta.log_structure_joint(g) ==
        doctest::Approx(beta.log_beta_at(0, 0) + beta.log_beta_at(1, 0b001u) +
                        beta.log_beta_at(2, 0b011u)));
}

TEST_CASE("variable-count guard and indegree validation") {
  Dataset wide;
  for (int j = 0; j < 26; ++j) {
    wide.names.push_back("X" + std::to_string(j));
    wide.arity.push_back(2);
    wide.labels.push_back({"0", "1"});
  }
  wide.rows.push_back(std::vector<std::uint8_t>(26, 0));
  wide.rows.push_back(std::vector<std::uint8_t>(26, 1));
  CHECK_THROWS_AS(build_beta_tables(wide, k2_config(1)), GuardError);

  const Dataset d = testutil::random_binary_dataset(3, 10, 1);
  CHECK_THROWS_AS(build_beta_tables(d, k2_config(3)), std::invalid_argument);
  CHECK_THROWS_AS(build_beta_tables(d, k2_config(-1)), std::invalid_argument);
  CHECK_THROWS_AS(build_beta_tables(d, bdeu_config(1, 0.0)), std::invalid_argument);
}

TEST_CASE("score table dump / load roundtrip keyed by content hash") {
  const Dataset d = testutil::random_binary_dataset(4, 20, 7);
  const ScoreConfig cfg = k2_config(2);
  const FamilyScoreTable beta = build_beta_tables(d, cfg);
  const std::string path = "score_cache_test.json";
  dump_score_table(beta, d, cfg, path);

  const auto loaded = try_load_score_table(path, d, cfg);
  REQUIRE(loaded.has_value());
  CHECK(loaded->log_beta == beta.log_beta);  // bitwise identical
  CHECK(loaded->max_indegree == beta.max_indegree);

  // A different dataset or config must refuse the cached tables.
  const Dataset other = testutil::random_binary_dataset(4, 20, 8);
  CHECK(!try_load_score_table(path, other, cfg).has_value());
  CHECK(!try_load_score_table(path, d, k2_config(3)).has_value());
  CHECK(!try_load_score_table(path, d, bdeu_config(2)).has_value());
  CHECK(!try_load_score_table("does_not_exist.json", d, cfg).has_value());
  CHECK(score_content_hash(d, cfg) != score_content_hash(other, cfg));
  std::remove(path.c_str());
}
