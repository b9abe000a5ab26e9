#pragma once

// Posterior estimators over sampled structures.
//
// Orders are drawn from p(order | D), so a DAG with many linear extensions is
// over-represented in raw draws by exactly its extension count.  The
// importance-weighted estimator removes that bias by deduplicating the sample
// to the set of distinct DAGs G and using each DAG's own (unnormalized)
// posterior weight:
//
//   p_hat(f | D)  =  sum_{G in G, f(G)} w(G)  /  sum_{G in G} w(G),
//
// with w(G) = exp(log beta-weight).  How often a DAG was drawn is irrelevant
// to the estimate; multiplicities are kept for diagnostics only.  When the
// exact structure evidence is available, Delta = (captured mass) / (total
// mass) turns the point estimate into the guaranteed enclosure
// [Delta * p_hat, Delta * p_hat + 1 - Delta], since the unseen mass 1 - Delta
// can fall entirely inside or outside the feature.

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dagsample/features.hpp"
#include "dagsample/logspace.hpp"
#include "dagsample/sampler.hpp"
#include "dagsample/structures.hpp"
#include "dagsample/subset_dp.hpp"

namespace dagsample {

// A deduplicated sample: distinct DAGs in first-draw order (by ascending draw
// index) with their weights and draw multiplicities.
struct UniqueDagSet {
  struct Item {
    Dag dag;
    double log_joint = 0.0;
    std::uint64_t multiplicity = 0;
  };
  std::vector<Item> items;
  std::uint64_t total_draws = 0;
  double log_total_weight = kNegInf;  // logsumexp of the distinct log joints
};

// Deduplicates a DDS sample (any input order; items come out in ascending
// first-draw index).
UniqueDagSet dedupe_samples(const std::vector<DdsSample>& samples);

// Incremental deduplication for nested-sample studies: adding draws never
// changes existing items, so captured mass is nondecreasing.
class DagAccumulator {
 public:
  void add(const DdsSample& sample);
  UniqueDagSet snapshot() const;

 private:
  std::unordered_map<Dag, std::size_t, DagHash> index_;
  std::vector<UniqueDagSet::Item> items_;
  std::uint64_t total_draws_ = 0;
};

struct FeatureEstimate {
  double point = 0.0;  // importance-weighted posterior estimate
  // Captured posterior mass Delta and the sound enclosure; present only when
  // the exact structure evidence was supplied.
  std::optional<double> delta;
  std::optional<std::pair<double, double>> interval;
  bool delta_clamped = false;  // Delta > 1 by rounding, clamped to 1
  std::uint64_t draws = 0;
  std::uint64_t unique_dags = 0;
};

// The importance-weighted estimator.  `log_structure_evidence` is
// log sum_G w(G) over all DAGs (from the exact reference); when absent the
// interval is omitted.
FeatureEstimate estimate_feature_iw(const UniqueDagSet& sample,
                                    const FeatureExpr& feature,
                                    std::optional<double> log_structure_evidence);

// Per-edge matrix version (indexed [child][parent]) computed in one pass.
std::vector<std::vector<double>> estimate_edges_iw(const UniqueDagSet& sample);

// The uncorrected frequency estimator over raw draws: mean of f(G_i).  It
// converges to the order-modular posterior, not the structure posterior, and
// is provided as the baseline the weighted estimator is compared against.
double estimate_feature_frequency(const std::vector<DdsSample>& samples,
                                  const FeatureExpr& feature);

// Rao-Blackwellized edge estimator over sampled orders: averages the exact
// per-order edge posteriors.  Converges to the order-modular edge posterior.
std::vector<std::vector<double>> estimate_edges_order_mean(
    const DpTables& dp, const std::vector<TotalOrder>& orders);

}  // namespace dagsample
