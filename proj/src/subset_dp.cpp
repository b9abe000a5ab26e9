#include "dagsample/subset_dp.hpp"

#include <cmath>

#include "dagsample/logspace.hpp"

namespace dagsample {

namespace {

// In-place subset-sum transform: w[S] <- sum_{T subset of S} w[T] over a
// `bits`-wide domain.
void zeta_transform(std::vector<double>& w, int bits) {
  const std::size_t size = std::size_t{1} << bits;
  for (int d = 0; d < bits; ++d) {
    const std::size_t bit = std::size_t{1} << d;
    for (std::size_t x = 0; x < size; ++x)
      if (x & bit) w[x] += w[x ^ bit];
  }
}

// Log-space variant with log_add in place of +; exact same recurrence, used
// only as a defensive fallback.
void zeta_transform_log(std::vector<double>& w, int bits) {
  const std::size_t size = std::size_t{1} << bits;
  for (int d = 0; d < bits; ++d) {
    const std::size_t bit = std::size_t{1} << d;
    for (std::size_t x = 0; x < size; ++x)
      if (x & bit) w[x] = log_add(w[x], w[x ^ bit]);
  }
}

double row_max(const std::vector<double>& row) {
  double m = kNegInf;
  for (double v : row) m = std::max(m, v);
  return m;
}

}  // namespace

std::vector<std::vector<double>> build_log_alpha(const FamilyScoreTable& beta,
                                                 bool truncated, int workers) {
  const int n = beta.n;
  const int bits = n - 1;
  const std::size_t size = std::size_t{1} << bits;
  std::vector<std::vector<double>> log_alpha(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), workers,
               [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::vector<double>& src = beta.log_beta[i];
      const double shift = row_max(src);
      std::vector<double> acc;
      if (!truncated) {
        acc.resize(size);
        for (std::size_t x = 0; x < size; ++x)
          acc[x] = src[x] == kNegInf ? 0.0 : std::exp(src[x] - shift);
        zeta_transform(acc, bits);
      } else {
        // One transform per parent-set size layer; the sum of the layers is
        // the size-bounded subset sum.
        acc.assign(size, 0.0);
        std::vector<double> layer(size);
        for (int s = 0; s <= beta.max_indegree && s <= bits; ++s) {
          for (std::size_t x = 0; x < size; ++x)
            layer[x] = (popcount(static_cast<NodeSet>(x)) == s &&
                        src[x] != kNegInf)
                           ? std::exp(src[x] - shift)
                           : 0.0;
          zeta_transform(layer, bits);
          for (std::size_t x = 0; x < size; ++x) acc[x] += layer[x];
        }
      }

      std::vector<double>& dst = log_alpha[i];
      dst.resize(size);
      bool finite = true;
      for (std::size_t x = 0; x < size; ++x) {
        dst[x] = shift + std::log(acc[x]);
        if (!std::isfinite(dst[x])) finite = false;
      }
      // The empty parent set keeps every alpha finite and the summands are
      // bounded by exp(0), so this path should never trigger; recompute the
      // row entirely in log space if floating point proves otherwise.
      if (!finite) {
        dst = src;
        zeta_transform_log(dst, bits);
      }
    }
  });
  return log_alpha;
}

std::vector<double> forward_accumulants(
    int n, const std::vector<std::vector<double>>& log_alpha) {
  const std::size_t size = std::size_t{1} << n;
  std::vector<double> log_l(size, kNegInf);
  log_l[0] = 0.0;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n));
  // Ascending mask value visits every proper subset before its supersets.
  for (std::size_t s = 1; s < size; ++s) {
    terms.clear();
    NodeSet rest = static_cast<NodeSet>(s);
    while (rest) {
      const int i = lowest_bit(rest);
      rest &= rest - 1;
      const NodeSet prefix = without_bit(static_cast<NodeSet>(s), i);
      terms.push_back(log_alpha[static_cast<std::size_t>(i)][squeeze(prefix, i)] +
                      log_l[prefix]);
    }
    log_l[s] = log_sum_exp(terms);
  }
  return log_l;
}

std::vector<double> backward_accumulants(
    int n, const std::vector<std::vector<double>>& log_alpha) {
  const std::size_t size = std::size_t{1} << n;
  const NodeSet all = full_set(n);
  std::vector<double> log_r(size, kNegInf);
  log_r[0] = 0.0;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n));
  for (std::size_t s = 1; s < size; ++s) {
    terms.clear();
    const NodeSet before = all & ~static_cast<NodeSet>(s);  // predecessors of the tail
    NodeSet rest = static_cast<NodeSet>(s);
    while (rest) {
      const int i = lowest_bit(rest);
      rest &= rest - 1;
      terms.push_back(log_alpha[static_cast<std::size_t>(i)][squeeze(before, i)] +
                      log_r[without_bit(static_cast<NodeSet>(s), i)]);
    }
    log_r[s] = log_sum_exp(terms);
  }
  return log_r;
}

DpTables build_dp_tables(const FamilyScoreTable& beta, bool truncated,
                         int workers) {
  DpTables dp;
  dp.n = beta.n;
  dp.log_alpha = build_log_alpha(beta, truncated, workers);
  dp.log_l = forward_accumulants(dp.n, dp.log_alpha);
  dp.log_r = backward_accumulants(dp.n, dp.log_alpha);
  return dp;
}

double log_order_joint(const DpTables& dp, const TotalOrder& order) {
  if (order.n() != dp.n)
    throw std::invalid_argument("order length does not match table dimension");
  double total = 0.0;
  NodeSet placed = 0;
  for (int pos = 0; pos < dp.n; ++pos) {
    const int node = order.sigma[static_cast<std::size_t>(pos)];
    total += dp.log_alpha_at(node, placed);
    placed = with_bit(placed, node);
  }
  return total;
}

double parent_log_posterior_in_order(const FamilyScoreTable& beta,
                                     const DpTables& dp, int i, NodeSet pa,
                                     NodeSet u) {
  if ((pa & ~u) != 0)
    throw std::domain_error(
        "parent set is not contained in the node's predecessor set");
  if (contains(u, i))
    throw std::domain_error("predecessor set contains the node itself");
  return beta.log_beta_at(i, pa) - dp.log_alpha_at(i, u);
}

double edge_posterior_in_order(const DpTables& dp, int j, int i, NodeSet u) {
  if (!contains(u, j)) return 0.0;
  const double ratio =
      std::exp(dp.log_alpha_at(i, without_bit(u, j)) - dp.log_alpha_at(i, u));
  return std::min(1.0, std::max(0.0, 1.0 - ratio));
}

std::vector<std::vector<double>> exact_edge_posteriors(
    const FamilyScoreTable& beta, const DpTables& dp, int workers) {
  const int n = beta.n;
  const int bits = n - 1;
  const std::size_t size = std::size_t{1} << bits;
  const NodeSet all = full_set(n);
  const double log_z = dp.log_order_evidence();
  std::vector<std::vector<double>> post(
      static_cast<std::size_t>(n),
      std::vector<double>(static_cast<std::size_t>(n), 0.0));

  // One masked transform per ordered pair: zero out parent sets missing j,
  // subset-sum, then weigh each predecessor set U by L(U) * R(V \ U \ {i}).
  // Every summand is a probability mass <= 1 after dividing by L(V), so the
  // outer accumulation is done in linear space term by term.
  parallel_for(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), workers,
               [&](std::size_t begin, std::size_t end) {
    std::vector<double> w(size);
    for (std::size_t pair = begin; pair < end; ++pair) {
      const int i = static_cast<int>(pair / static_cast<std::size_t>(n));
      const int j = static_cast<int>(pair % static_cast<std::size_t>(n));
      if (i == j) continue;
      const std::vector<double>& src = beta.log_beta[static_cast<std::size_t>(i)];
      const double shift = row_max(src);
      // Bit position of parent j inside the squeezed domain of child i.
      const std::size_t j_bit = std::size_t{1} << (j < i ? j : j - 1);
      for (std::size_t x = 0; x < size; ++x)
        w[x] = ((x & j_bit) != 0 && src[x] != kNegInf)
                   ? std::exp(src[x] - shift)
                   : 0.0;
      zeta_transform(w, bits);
      double acc = 0.0;
      for (std::size_t x = 0; x < size; ++x) {
        if (w[x] == 0.0) continue;  // predecessor sets without j contribute 0
        const NodeSet u = unsqueeze(static_cast<std::uint32_t>(x), i);
        const double term = shift + std::log(w[x]) + dp.log_l[u] +
                            dp.log_r[all ^ u ^ (NodeSet{1} << i)] - log_z;
        acc += std::exp(term);
      }
      post[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          std::min(1.0, acc);
    }
  });
  return post;
}

}  // namespace dagsample
