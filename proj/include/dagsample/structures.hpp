#pragma once

// Structural domain types shared across modules: total orders over the
// variables and DAG structures given by per-node parent sets.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dagsample/common.hpp"

namespace dagsample {

// A total order sigma over the n variables; sigma[pos] is the variable at
// position pos, positions 0..n-1 from first to last.  A variable's allowed
// parents are exactly its predecessors (smaller positions).
struct TotalOrder {
  std::vector<int> sigma;

  int n() const { return static_cast<int>(sigma.size()); }

  // Mask of the variables placed strictly before position pos.
  NodeSet predecessors(int pos) const {
    NodeSet u = 0;
    for (int p = 0; p < pos; ++p) u = with_bit(u, sigma[static_cast<std::size_t>(p)]);
    return u;
  }
};

// A directed acyclic graph over n variables, stored as one parent mask per
// node: bit j of parents[i] set <=> edge j -> i.
struct Dag {
  int n = 0;
  std::vector<NodeSet> parents;

  Dag() = default;
  explicit Dag(int n_vars)
      : n(n_vars), parents(static_cast<std::size_t>(n_vars), 0) {}

  bool has_edge(int from, int to) const {
    return contains(parents[static_cast<std::size_t>(to)], from);
  }

  int max_indegree() const {
    int k = 0;
    for (NodeSet pa : parents) k = std::max(k, popcount(pa));
    return k;
  }

  std::uint64_t edge_count() const {
    std::uint64_t e = 0;
    for (NodeSet pa : parents) e += static_cast<std::uint64_t>(popcount(pa));
    return e;
  }

  // Kahn-style check; parent masks always define a digraph, this verifies it
  // has no directed cycle.
  bool is_acyclic() const {
    std::vector<NodeSet> pending = parents;
    NodeSet placed = 0;
    for (int step = 0; step < n; ++step) {
      int found = -1;
      for (int i = 0; i < n; ++i) {
        if (!contains(placed, i) && pending[static_cast<std::size_t>(i)] == 0) {
          found = i;
          break;
        }
      }
      if (found < 0) return false;
      placed = with_bit(placed, found);
      for (int i = 0; i < n; ++i)
        pending[static_cast<std::size_t>(i)] =
            pending[static_cast<std::size_t>(i)] & ~placed;
    }
    return true;
  }

  // True when every edge points from an earlier to a later position of the
  // given order, i.e. the order is a linear extension of the DAG.
  bool consistent_with(const TotalOrder& order) const {
    NodeSet seen = 0;
    for (int pos = 0; pos < n; ++pos) {
      const int node = order.sigma[static_cast<std::size_t>(pos)];
      if ((parents[static_cast<std::size_t>(node)] & ~seen) != 0) return false;
      seen = with_bit(seen, node);
    }
    return true;
  }

  bool operator==(const Dag& other) const {
    return n == other.n && parents == other.parents;
  }
};

// Stable 64-bit hash of a DAG's parent-mask vector (for deduplication maps).
struct DagHash {
  std::size_t operator()(const Dag& g) const {
    Fnv1a64 h;
    h.update_u64(static_cast<std::uint64_t>(g.n));
    for (NodeSet pa : g.parents) h.update_u64(pa);
    return static_cast<std::size_t>(h.digest());
  }
};

}  // namespace dagsample
