#pragma once

// Posterior sampling of DAG structures.
//
// Orders are drawn exactly from p(order | D) by walking the forward
// accumulants backwards: the last position of the order is filled first, each
// placement consuming exactly one uniform.  Given an order, a DAG is drawn
// exactly from p(G | order, D) by choosing every node's parent set from its
// predecessor set; the per-(node, predecessor-set) cumulative interval table
// is memoized in a bounded cache because distinct orders share prefixes.
//
// Randomness is addressed, not streamed: order draw o reads stream o of the
// order phase and the DAG completing draw o reads stream o of the DAG phase,
// so results are independent of worker count, processing order and cache
// effects (draw o's DAG depends only on draw o's order and its own stream).

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dagsample/common.hpp"
#include "dagsample/rng.hpp"
#include "dagsample/scores.hpp"
#include "dagsample/structures.hpp"
#include "dagsample/subset_dp.hpp"

namespace dagsample {

struct IntervalCacheConfig {
  // Capacity in interval slots (stored doubles), not entries.
  std::uint64_t capacity_slots = std::uint64_t{1} << 26;
  bool enabled = true;
};

struct IntervalCacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t insertions = 0;
  std::uint64_t rejected = 0;   // tables larger than the whole cache
  std::uint64_t recycles = 0;   // batch evictions performed
  std::uint64_t evicted_entries = 0;
};

// Bounded memo of cumulative-probability tables keyed by (node, predecessor
// set).  Eviction is lazy: an insert that finds the cache over capacity first
// recycles — evicts entries in ascending (hit count, insertion sequence)
// order until at least a quarter of the capacity is reclaimed — then stores
// its entry.  Lookups never evict, so a table handed out by find() stays
// valid until the next insert.
class IntervalCache {
 public:
  explicit IntervalCache(const IntervalCacheConfig& cfg) : cfg_(cfg) {}

  // Returns the cached table (bumping its hit count) or nullptr.
  const std::vector<double>* find(int node, NodeSet u);

  void insert(int node, NodeSet u, std::vector<double> cumulative);

  std::uint64_t stored_slots() const { return stored_slots_; }
  std::size_t entry_count() const { return entries_.size(); }
  const IntervalCacheStats& stats() const { return stats_; }

 private:
  struct Entry {
    std::vector<double> cumulative;
    std::uint64_t hits = 0;
    std::uint64_t seq = 0;
  };

  static std::uint64_t key(int node, NodeSet u) {
    return (static_cast<std::uint64_t>(node) << 32) | u;
  }

  void recycle();

  IntervalCacheConfig cfg_;
  std::unordered_map<std::uint64_t, Entry> entries_;
  std::uint64_t stored_slots_ = 0;
  std::uint64_t next_seq_ = 0;
  IntervalCacheStats stats_;
};

// Cumulative probabilities of the canonical parent-set enumeration of
// predecessor set u for the given node: entry t is
// sum_{s<=t} p(Pa = set_s | predecessors u, D).  The final entry is 1 up to
// rounding.
std::vector<double> build_cumulative_intervals(const FamilyScoreTable& beta,
                                               const DpTables& dp, int node,
                                               NodeSet u);

// One exact order draw (n uniforms, one per position, filled from the back).
TotalOrder sample_order(const DpTables& dp, PhiloxRng& rng);

// One exact DAG draw given an order (n uniforms, one per node in order
// position).  The cache pointer may be null.
Dag sample_dag_given_order(const TotalOrder& order, const FamilyScoreTable& beta,
                           const DpTables& dp, IntervalCache* cache,
                           PhiloxRng& rng);

struct DdsSample {
  Dag dag;
  double log_joint = 0.0;        // log beta-weight of the structure
  std::uint64_t draw_index = 0;  // which order draw produced it
};

struct DdsConfig {
  std::uint64_t n_orders = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  IntervalCacheConfig cache;
};

struct DdsRun {
  // Orders indexed by draw index.
  std::vector<TotalOrder> orders;
  std::vector<double> log_order_joints;
  // DAG samples in processing order: descending order joint, ties by draw
  // index (so that high-probability orders, which share the most cache
  // entries, are completed adjacently).
  std::vector<DdsSample> samples;
  IntervalCacheStats cache_stats;  // summed over workers
  double seconds_orders = 0.0;
  double seconds_dags = 0.0;
};

// The full sampling pipeline on prebuilt tables: draw n_orders orders, sort
// them by posterior weight, complete each into a DAG.  Draw i of the result
// is an exact iid sample from the order-modular structure posterior.
DdsRun run_dds(const FamilyScoreTable& beta, const DpTables& dp,
               const DdsConfig& cfg);

}  // namespace dagsample
