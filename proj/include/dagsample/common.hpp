#pragma once

// Shared primitives for the whole library.
//
// A set of variables is encoded as an n-bit mask (bit j set <=> variable j is
// a member).  Every component that enumerates parent sets uses one canonical
// order — ascending cardinality, then ascending numeric mask value — so the
// dynamic program, the sampler's interval cache and the serialization formats
// all agree on which set is "the t-th one".

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dagsample {

using NodeSet = std::uint32_t;  // n-bit subset encoding; bit j <=> variable j

// Hard default cap on the variable count.  The DP tables hold
// n*2^(n-1) + 2*2^n doubles, which passes ~4 GB around n = 26; lifting the
// cap requires an explicit acknowledgment flag.
inline constexpr int kDefaultMaxVars = 25;

// Raised when an input file or dataset violates the data contract.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a request exceeds a documented size/feasibility guard.
class GuardError : public std::runtime_error {
 public:
  explicit GuardError(const std::string& what) : std::runtime_error(what) {}
};

inline int popcount(NodeSet s) { return std::popcount(s); }

inline NodeSet full_set(int n) {
  return n >= 32 ? ~NodeSet{0} : (NodeSet{1} << n) - 1;
}

inline bool contains(NodeSet s, int j) { return (s >> j) & 1u; }

inline NodeSet with_bit(NodeSet s, int j) { return s | (NodeSet{1} << j); }

inline NodeSet without_bit(NodeSet s, int j) { return s & ~(NodeSet{1} << j); }

inline int lowest_bit(NodeSet s) { return std::countr_zero(s); }

// Re-indexes a subset of V\{i} as an (n-1)-bit value by deleting bit i and
// shifting the higher bits down.  Monotone in the mask value, so canonical
// (size, value) iteration order is preserved under squeezing.
inline std::uint32_t squeeze(NodeSet s, int i) {
  const NodeSet low = s & ((NodeSet{1} << i) - 1);
  return low | ((s >> (i + 1)) << i);
}

// Inverse of squeeze: expands an (n-1)-bit index back to an n-bit mask that
// avoids bit i.
inline NodeSet unsqueeze(std::uint32_t x, int i) {
  const NodeSet low = x & ((NodeSet{1} << i) - 1);
  return low | ((static_cast<NodeSet>(x) >> i) << (i + 1));
}

// Ascending list of the set bits of a mask.
inline std::vector<int> set_bits(NodeSet s) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(popcount(s)));
  while (s) {
    const int b = lowest_bit(s);
    out.push_back(b);
    s &= s - 1;
  }
  return out;
}

// Exact binomial coefficients up to C(32, 16); C(25, 12) ~ 5.2e6 so uint64
// is ample for every set size this library can encounter.
class BinomialTable {
 public:
  static const BinomialTable& instance() {
    static const BinomialTable table;
    return table;
  }

  std::uint64_t operator()(int n, int k) const {
    if (k < 0 || k > n || n < 0) return 0;
    return c_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
  }

 private:
  BinomialTable() : c_(33, std::vector<std::uint64_t>(33, 0)) {
    for (std::size_t n = 0; n < c_.size(); ++n) {
      c_[n][0] = 1;
      for (std::size_t k = 1; k <= n; ++k)
        c_[n][k] = c_[n - 1][k - 1] + (k <= n - 1 ? c_[n - 1][k] : 0);
    }
  }

  std::vector<std::vector<std::uint64_t>> c_;
};

inline std::uint64_t binomial(int n, int k) {
  return BinomialTable::instance()(n, k);
}

// Number of subsets of a |u|-element set with size <= max_size.
inline std::uint64_t count_subsets_up_to(int u, int max_size) {
  std::uint64_t total = 0;
  for (int s = 0; s <= max_size && s <= u; ++s) total += binomial(u, s);
  return total;
}

// Visits every subset of `universe` with cardinality <= max_size in the
// canonical (size, then ascending mask value) order.  Fixed-size masks are
// enumerated over the compressed bit positions with Gosper's hack and
// expanded through the (monotone) position map, which preserves value order.
template <typename F>
void for_each_subset_up_to(NodeSet universe, int max_size, F&& visit) {
  const std::vector<int> pos = set_bits(universe);
  const int u = static_cast<int>(pos.size());
  const auto expand = [&pos](std::uint32_t compressed) {
    NodeSet out = 0;
    while (compressed) {
      const int b = std::countr_zero(compressed);
      out |= NodeSet{1} << pos[static_cast<std::size_t>(b)];
      compressed &= compressed - 1;
    }
    return out;
  };
  visit(NodeSet{0});  // size 0
  const int top = max_size < u ? max_size : u;
  for (int s = 1; s <= top; ++s) {
    std::uint32_t m = (std::uint32_t{1} << s) - 1;
    const std::uint32_t limit = std::uint32_t{1} << u;
    while (m < limit) {
      visit(expand(m));
      // Gosper's hack: next mask with the same popcount.
      const std::uint32_t c = m & (~m + 1);
      const std::uint32_t r = m + c;
      m = r | (((m ^ r) >> 2) / c);
    }
  }
}

// Recovers the subset at position `rank` of the canonical enumeration of
// subsets of `universe` with cardinality <= max_size (the inverse of
// for_each_subset_up_to's visiting order).  Within a size class the value
// order over expanded masks equals colexicographic order over compressed
// position tuples, which unranks with binomial coefficients.
inline NodeSet unrank_subset_up_to(NodeSet universe, std::uint64_t rank,
                                   int max_size) {
  const std::vector<int> pos = set_bits(universe);
  const int u = static_cast<int>(pos.size());
  int s = 0;
  while (true) {
    const std::uint64_t block = binomial(u, s);
    if (rank < block) break;
    rank -= block;
    ++s;
    if (s > max_size || s > u)
      throw std::out_of_range("subset rank exceeds enumeration size");
  }
  NodeSet out = 0;
  int hi = u;  // positions must be < hi (strictly decreasing as we descend)
  for (int t = s; t >= 1; --t) {
    int p = hi - 1;
    while (p >= t - 1 && binomial(p, t) > rank) --p;
    rank -= binomial(p, t);
    out |= NodeSet{1} << pos[static_cast<std::size_t>(p)];
    hi = p;
  }
  return out;
}

// Runs fn(begin, end) over [0, total) split into contiguous chunks across
// `workers` threads; workers <= 1 executes inline.  Chunk boundaries depend
// only on (total, workers), so any index-addressed output is deterministic.
inline void parallel_for(std::size_t total, int workers,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (total == 0) return;
  if (workers <= 1 || total == 1) {
    fn(0, total);
    return;
  }
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), total);
  const std::size_t chunk = (total + w - 1) / w;
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(total, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : threads) th.join();
}

// FNV-1a 64-bit; used for content hashes of (dataset, config) pairs.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ull;
    }
  }
  void update_u64(std::uint64_t v) { update(&v, sizeof v); }
  void update_string(const std::string& s) {
    update_u64(s.size());
    update(s.data(), s.size());
  }
  std::uint64_t digest() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

}  // namespace dagsample
