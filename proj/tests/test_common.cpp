#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <set>

#include "dagsample/common.hpp"
#include "dagsample/logspace.hpp"
#include "dagsample/rng.hpp"

using namespace dagsample;

TEST_CASE("full_set and bit helpers") {
  CHECK(full_set(0) == 0u);
  CHECK(full_set(1) == 0b1u);
  CHECK(full_set(4) == 0b1111u);
  CHECK(full_set(25) == (1u << 25) - 1);
  CHECK(contains(0b1010u, 1));
  CHECK(!contains(0b1010u, 0));
  CHECK(with_bit(0b100u, 0) == 0b101u);
  CHECK(without_bit(0b101u, 0) == 0b100u);
  CHECK(lowest_bit(0b1100u) == 2);
  CHECK(set_bits(0b10110u) == std::vector<int>{1, 2, 4});
  CHECK(popcount(0b10110u) == 3);
}

TEST_CASE("squeeze deletes one bit position and unsqueeze restores it") {
  // Explicit example: mask {0,2,3} over n=5, deleting position 1:
  // bits above position 1 shift down one slot.
  CHECK(squeeze(0b01101u, 1) == 0b0111u);
  CHECK(unsqueeze(0b0111u, 1) == 0b01101u);
  // Deleting position 0 is a plain shift.
  CHECK(squeeze(0b1010u, 0) == 0b101u);
  // Roundtrip over an exhaustive small domain, every deleted position.
  const int n = 6;
  for (int i = 0; i < n; ++i) {
    for (NodeSet s = 0; s < (1u << n); ++s) {
      if (contains(s, i)) continue;
      const std::uint32_t x = squeeze(s, i);
      CHECK(x < (1u << (n - 1)));
      CHECK(unsqueeze(x, i) == s);
    }
    // Monotone: squeezing preserves the numeric order of masks.
    std::uint32_t prev = 0;
    bool first = true;
    for (NodeSet s = 0; s < (1u << n); ++s) {
      if (contains(s, i)) continue;
      const std::uint32_t x = squeeze(s, i);
      if (!first) CHECK(x > prev);
      prev = x;
      first = false;
    }
  }
}

TEST_CASE("binomial coefficients") {
  CHECK(binomial(0, 0) == 1);
  CHECK(binomial(4, 2) == 6);
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(25, 12) == 5200300);
  CHECK(binomial(3, 5) == 0);
  CHECK(binomial(5, -1) == 0);
  CHECK(count_subsets_up_to(4, 2) == 1 + 4 + 6);
  CHECK(count_subsets_up_to(4, 9) == 16);
}

TEST_CASE("canonical subset enumeration: ascending size, then ascending value") {
  const NodeSet universe = 0b11011u;  // bits {0,1,3,4}
  std::vector<NodeSet> seen;
  for_each_subset_up_to(universe, 3, [&](NodeSet s) { seen.push_back(s); });
  CHECK(seen.size() == count_subsets_up_to(4, 3));
  // Every element is a subset of the universe within the size bound, no
  // repeats, and the ordering key (size, value) strictly increases.
  std::set<NodeSet> uniq(seen.begin(), seen.end());
  CHECK(uniq.size() == seen.size());
  for (std::size_t t = 0; t < seen.size(); ++t) {
    CHECK((seen[t] & ~universe) == 0u);
    CHECK(popcount(seen[t]) <= 3);
    if (t > 0) {
      const auto key = [](NodeSet s) {
        return std::pair<int, NodeSet>(popcount(s), s);
      };
      CHECK(key(seen[t - 1]) < key(seen[t]));
    }
  }
  // Spot check the first few entries by hand.
  REQUIRE(seen.size() >= 6);
  CHECK(seen[0] == 0b00000u);
  CHECK(seen[1] == 0b00001u);
  CHECK(seen[2] == 0b00010u);
  CHECK(seen[3] == 0b01000u);
  CHECK(seen[4] == 0b10000u);
  CHECK(seen[5] == 0b00011u);
}

TEST_CASE("unrank inverts the canonical enumeration") {
  for (NodeSet universe : {NodeSet{0b11011u}, NodeSet{0b1111111u}, NodeSet{0b1010101u}}) {
    for (int k : {0, 1, 2, 4, 7}) {
      std::vector<NodeSet> seen;
      for_each_subset_up_to(universe, k, [&](NodeSet s) { seen.push_back(s); });
      for (std::size_t t = 0; t < seen.size(); ++t)
        CHECK(unrank_subset_up_to(universe, t, k) == seen[t]);
      CHECK_THROWS_AS(unrank_subset_up_to(universe, seen.size(), k),
                      std::out_of_range);
    }
  }
}

TEST_CASE("parallel_for covers the range exactly once, any worker count") {
  for (int workers : {1, 2, 3, 7}) {
    std::vector<std::atomic<int>> hits(101);
    for (auto& h : hits) h = 0;
    parallel_for(hits.size(), workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) ++hits[i];
    });
    for (auto& h : hits) CHECK(h == 1);
  }
  parallel_for(0, 4, [&](std::size_t, std::size_t) { CHECK(false); });
}

TEST_CASE("log-space helpers") {
  CHECK(log_add(kNegInf, kNegInf) == kNegInf);
  CHECK(log_add(0.0, kNegInf) == 0.0);
  CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
  CHECK(log_sum_exp(std::vector<double>{}) == kNegInf);
  CHECK(log_sum_exp({std::log(1.0), std::log(2.0), std::log(3.0)}) ==
        doctest::Approx(std::log(6.0)));
  // Max shift keeps huge offsets stable.
  CHECK(log_sum_exp({1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
  CHECK(log_sum_exp({-1000.0, -1000.0 + std::log(2.0)}) ==
        doctest::Approx(-1000.0 + std::log(3.0)));
}

TEST_CASE("counter rng: deterministic, stream-independent, uniform-ish") {
  PhiloxRng a(42, RngPhase::kOrder, 7);
  PhiloxRng b(42, RngPhase::kOrder, 7);
  for (int t = 0; t < 100; ++t) CHECK(a.next_u64() == b.next_u64());

  // Different stream, phase, or seed give different sequences.
  PhiloxRng c(42, RngPhase::kOrder, 8);
  PhiloxRng d(42, RngPhase::kDag, 7);
  PhiloxRng e(43, RngPhase::kOrder, 7);
  PhiloxRng base(42, RngPhase::kOrder, 7);
  int diff_c = 0, diff_d = 0, diff_e = 0;
  for (int t = 0; t < 16; ++t) {
    const std::uint64_t x = base.next_u64();
    diff_c += x != c.next_u64();
    diff_d += x != d.next_u64();
    diff_e += x != e.next_u64();
  }
  CHECK(diff_c > 12);
  CHECK(diff_d > 12);
  CHECK(diff_e > 12);

  // Doubles live in [0,1) and average near 1/2.
  PhiloxRng f(1, RngPhase::kHarness, 0);
  double mean = 0.0;
  for (int t = 0; t < 20000; ++t) {
    const double u = f.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    mean += u;
  }
  mean /= 20000.0;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("fnv1a hashing is order-sensitive and deterministic") {
  Fnv1a64 h1, h2, h3;
  h1.update_string("ab");
  h2.update_string("ab");
  h3.update_string("ba");
  CHECK(h1.digest() == h2.digest());
  CHECK(h1.digest() != h3.digest());
}
