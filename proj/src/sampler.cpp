#include "dagsample/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "dagsample/logspace.hpp"

namespace dagsample {

const std::vector<double>* IntervalCache::find(int node, NodeSet u) {
  if (!cfg_.enabled) return nullptr;
  auto it = entries_.find(key(node, u));
  if (it == entries_.end()) {
    ++stats_.misses;
    return nullptr;
  }
  ++it->second.hits;
  ++stats_.hits;
  return &it->second.cumulative;
}

void IntervalCache::insert(int node, NodeSet u, std::vector<double> cumulative) {
  if (!cfg_.enabled) return;
  if (cumulative.size() > cfg_.capacity_slots) {
    ++stats_.rejected;  // could never fit; do not thrash the cache for it
    return;
  }
  if (stored_slots_ > cfg_.capacity_slots) recycle();
  Entry entry;
  entry.hits = 0;
  entry.seq = next_seq_++;
  stored_slots_ += cumulative.size();
  entry.cumulative = std::move(cumulative);
  ++stats_.insertions;
  entries_.insert_or_assign(key(node, u), std::move(entry));
}

void IntervalCache::recycle() {
  ++stats_.recycles;
  const std::uint64_t batch = cfg_.capacity_slots / 4;
  // Coldest first: ascending hit count, then oldest insertion.
  std::vector<std::pair<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t>> order;
  order.reserve(entries_.size());
  for (const auto& [k, e] : entries_)
    order.push_back({{e.hits, e.seq}, k});
  std::sort(order.begin(), order.end());
  std::uint64_t reclaimed = 0;
  for (const auto& [rank, k] : order) {
    if (reclaimed >= batch) break;
    auto it = entries_.find(k);
    reclaimed += it->second.cumulative.size();
    stored_slots_ -= it->second.cumulative.size();
    entries_.erase(it);
    ++stats_.evicted_entries;
  }
}

std::vector<double> build_cumulative_intervals(const FamilyScoreTable& beta,
                                               const DpTables& dp, int node,
                                               NodeSet u) {
  const double log_total = dp.log_alpha_at(node, u);
  std::vector<double> cumulative;
  cumulative.reserve(count_subsets_up_to(popcount(u), beta.max_indegree));
  double acc = 0.0;
  const std::vector<double>& row = beta.log_beta[static_cast<std::size_t>(node)];
  for_each_subset_up_to(u, beta.max_indegree, [&](NodeSet pa) {
    const double lp = row[squeeze(pa, node)];
    if (lp != kNegInf) acc += std::exp(lp - log_total);
    cumulative.push_back(acc);
  });
  return cumulative;
}

TotalOrder sample_order(const DpTables& dp, PhiloxRng& rng) {
  const int n = dp.n;
  TotalOrder order;
  order.sigma.assign(static_cast<std::size_t>(n), -1);
  NodeSet remaining = full_set(n);
  // Fill positions from the back: p(node x last among S) =
  // alpha_x(S \ {x}) * L(S \ {x}) / L(S).
  for (int pos = n - 1; pos >= 0; --pos) {
    const double u = rng.next_double();
    const double log_total = dp.log_l[remaining];
    double acc = 0.0;
    int chosen = -1;
    NodeSet rest = remaining;
    while (rest) {
      const int x = lowest_bit(rest);
      rest &= rest - 1;
      const NodeSet prefix = without_bit(remaining, x);
      acc += std::exp(dp.log_alpha_at(x, prefix) + dp.log_l[prefix] - log_total);
      chosen = x;
      if (acc > u) break;
    }
    order.sigma[static_cast<std::size_t>(pos)] = chosen;  // rounding: keep last
    remaining = without_bit(remaining, chosen);
  }
  return order;
}

Dag sample_dag_given_order(const TotalOrder& order, const FamilyScoreTable& beta,
                           const DpTables& dp, IntervalCache* cache,
                           PhiloxRng& rng) {
  const int n = order.n();
  Dag g(n);
  NodeSet placed = 0;
  for (int pos = 0; pos < n; ++pos) {
    const int node = order.sigma[static_cast<std::size_t>(pos)];
    const NodeSet u = placed;
    // The uniform is consumed before any cache interaction so the random
    // stream is identical whatever the cache does.
    const double r = rng.next_double();
    const std::vector<double>* table =
        cache ? cache->find(node, u) : nullptr;
    std::vector<double> fresh;
    if (table == nullptr) {
      fresh = build_cumulative_intervals(beta, dp, node, u);
      table = &fresh;
    }
    const auto it = std::upper_bound(table->begin(), table->end(), r);
    std::uint64_t rank = static_cast<std::uint64_t>(it - table->begin());
    if (rank >= table->size()) rank = table->size() - 1;  // rounding guard
    g.parents[static_cast<std::size_t>(node)] =
        unrank_subset_up_to(u, rank, beta.max_indegree);
    if (cache && !fresh.empty()) cache->insert(node, u, std::move(fresh));
    placed = with_bit(placed, node);
  }
  return g;
}

DdsRun run_dds(const FamilyScoreTable& beta, const DpTables& dp,
               const DdsConfig& cfg) {
  using clock = std::chrono::steady_clock;
  DdsRun run;
  const std::size_t count = static_cast<std::size_t>(cfg.n_orders);
  run.orders.assign(count, {});
  run.log_order_joints.assign(count, 0.0);

  const auto t0 = clock::now();
  parallel_for(count, cfg.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t o = begin; o < end; ++o) {
      PhiloxRng rng(cfg.seed, RngPhase::kOrder, o);
      run.orders[o] = sample_order(dp, rng);
      run.log_order_joints[o] = log_order_joint(dp, run.orders[o]);
    }
  });
  const auto t1 = clock::now();

  // Process orders from most to least probable; probable orders recur and
  // share prefixes, so their interval tables are the ones worth keeping hot.
  std::vector<std::size_t> processing(count);
  std::iota(processing.begin(), processing.end(), std::size_t{0});
  std::stable_sort(processing.begin(), processing.end(),
                   [&](std::size_t a, std::size_t b) {
                     return run.log_order_joints[a] > run.log_order_joints[b];
                   });

  run.samples.assign(count, {});
  const int workers = cfg.workers;
  std::vector<IntervalCacheStats> worker_stats(
      static_cast<std::size_t>(std::max(1, workers)));
  parallel_for(count, workers, [&](std::size_t begin, std::size_t end) {
    IntervalCache cache(cfg.cache);
    for (std::size_t s = begin; s < end; ++s) {
      const std::size_t o = processing[s];
      PhiloxRng rng(cfg.seed, RngPhase::kDag, o);
      DdsSample& out = run.samples[s];
      out.dag = sample_dag_given_order(run.orders[o], beta, dp, &cache, rng);
      out.log_joint = beta.log_structure_joint(out.dag);
      out.draw_index = o;
    }
    // Chunk boundaries are a pure function of (count, workers); use the
    // first index to identify the chunk.
    const std::size_t chunk =
        (count + static_cast<std::size_t>(std::max(1, workers)) - 1) /
        static_cast<std::size_t>(std::max(1, workers));
    worker_stats[begin / std::max<std::size_t>(1, chunk)] = cache.stats();
  });
  const auto t2 = clock::now();

  for (const auto& st : worker_stats) {
    run.cache_stats.hits += st.hits;
    run.cache_stats.misses += st.misses;
    run.cache_stats.insertions += st.insertions;
    run.cache_stats.rejected += st.rejected;
    run.cache_stats.recycles += st.recycles;
    run.cache_stats.evicted_entries += st.evicted_entries;
  }
  run.seconds_orders = std::chrono::duration<double>(t1 - t0).count();
  run.seconds_dags = std::chrono::duration<double>(t2 - t1).count();
  return run;
}

}  // namespace dagsample
