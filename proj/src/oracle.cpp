#include "dagsample/oracle.hpp"

#include <cmath>

#include "dagsample/logspace.hpp"
#include "dagsample/subset_dp.hpp"

namespace dagsample {

namespace {

void check_guard(int n, int limit, const char* what) {
  if (n > limit)
    throw GuardError(std::string(what) + " is limited to " +
                     std::to_string(limit) + " variables (got " +
                     std::to_string(n) + ")");
}

// Descendants of `node` in the partial graph described by child masks.
NodeSet descendants_of(const std::vector<NodeSet>& children, int node) {
  NodeSet reached = 0;
  NodeSet frontier = children[static_cast<std::size_t>(node)];
  while (frontier) {
    reached |= frontier;
    NodeSet next = 0;
    NodeSet f = frontier;
    while (f) {
      const int u = lowest_bit(f);
      f &= f - 1;
      next |= children[static_cast<std::size_t>(u)];
    }
    frontier = next & ~reached;
  }
  return reached;
}

void enumerate_rec(int n, int max_indegree, int node, Dag& g,
                   std::vector<NodeSet>& children,
                   const std::function<void(const Dag&)>& visit) {
  if (node == n) {
    visit(g);
    return;
  }
  // Any parent that is already a descendant of `node` would close a cycle;
  // a simple cycle can contain at most one edge into `node`, so excluding
  // descendants is exact, not just a pruning heuristic.
  const NodeSet allowed =
      full_set(n) & ~with_bit(descendants_of(children, node), node);
  for_each_subset_up_to(allowed, max_indegree, [&](NodeSet pa) {
    g.parents[static_cast<std::size_t>(node)] = pa;
    NodeSet ps = pa;
    while (ps) {
      const int p = lowest_bit(ps);
      ps &= ps - 1;
      children[static_cast<std::size_t>(p)] = with_bit(children[static_cast<std::size_t>(p)], node);
    }
    enumerate_rec(n, max_indegree, node + 1, g, children, visit);
    ps = pa;
    while (ps) {
      const int p = lowest_bit(ps);
      ps &= ps - 1;
      children[static_cast<std::size_t>(p)] = without_bit(children[static_cast<std::size_t>(p)], node);
    }
  });
  g.parents[static_cast<std::size_t>(node)] = 0;
}

std::vector<NodeSet> child_masks(const Dag& g) {
  std::vector<NodeSet> children(static_cast<std::size_t>(g.n), 0);
  for (int i = 0; i < g.n; ++i) {
    NodeSet pa = g.parents[static_cast<std::size_t>(i)];
    while (pa) {
      const int p = lowest_bit(pa);
      pa &= pa - 1;
      children[static_cast<std::size_t>(p)] = with_bit(children[static_cast<std::size_t>(p)], i);
    }
  }
  return children;
}

// value = sign * exp(lg); sign in {-1, 0, +1}.
struct SignedLog {
  double lg = kNegInf;
  int sign = 0;

  void add(double term_lg, int term_sign) {
    if (term_sign == 0 || term_lg == kNegInf) return;
    if (sign == 0) {
      lg = term_lg;
      sign = term_sign;
      return;
    }
    if (sign == term_sign) {
      lg = log_add(lg, term_lg);
      return;
    }
    // Opposite signs: subtract the smaller magnitude from the larger.
    if (lg == term_lg) {
      lg = kNegInf;
      sign = 0;
    } else if (lg > term_lg) {
      lg = lg + std::log1p(-std::exp(term_lg - lg));
    } else {
      lg = term_lg + std::log1p(-std::exp(lg - term_lg));
      sign = term_sign;
    }
  }
};

// Streaming logsumexp accumulator (max-shifted as it goes).
struct LogAccumulator {
  double shift = kNegInf;
  double acc = 0.0;

  void add(double lg) {
    if (lg == kNegInf) return;
    if (lg <= shift) {
      acc += std::exp(lg - shift);
    } else {
      acc = acc * std::exp(shift - lg) + 1.0;
      shift = lg;
    }
  }
  double value() const { return acc == 0.0 ? kNegInf : shift + std::log(acc); }
};

}  // namespace

void for_each_dag(int n, int max_indegree,
                  const std::function<void(const Dag&)>& visit) {
  check_guard(n, 6, "DAG enumeration");
  if (max_indegree < 0 || max_indegree > std::max(0, n - 1))
    throw std::invalid_argument("max_indegree must be in [0, n-1]");
  Dag g(n);
  std::vector<NodeSet> children(static_cast<std::size_t>(n), 0);
  enumerate_rec(n, max_indegree, 0, g, children, visit);
}

std::vector<Dag> enumerate_dags(int n, int max_indegree) {
  std::vector<Dag> out;
  for_each_dag(n, max_indegree, [&](const Dag& g) { out.push_back(g); });
  return out;
}

boost::multiprecision::cpp_int count_linear_extensions(const Dag& g) {
  check_guard(g.n, 20, "exact linear-extension counting");
  const std::vector<NodeSet> children = child_masks(g);
  const std::size_t size = std::size_t{1} << g.n;
  std::vector<boost::multiprecision::cpp_int> count(size, 0);
  count[0] = 1;
  for (std::size_t s = 1; s < size; ++s) {
    NodeSet rest = static_cast<NodeSet>(s);
    while (rest) {
      const int i = lowest_bit(rest);
      rest &= rest - 1;
      // i can be last among s iff it has no children inside s.
      if ((children[static_cast<std::size_t>(i)] & static_cast<NodeSet>(s)) == 0)
        count[s] += count[without_bit(static_cast<NodeSet>(s), i)];
    }
  }
  return count[size - 1];
}

double log_linear_extensions(const Dag& g) {
  check_guard(g.n, 25, "linear-extension counting");
  const std::vector<NodeSet> children = child_masks(g);
  const std::size_t size = std::size_t{1} << g.n;
  // Counts stay below n! <= 25! ~ 1.6e25, far inside double range; plain
  // doubles keep the DP linear and the result accurate to rounding.
  std::vector<double> count(size, 0.0);
  count[0] = 1.0;
  for (std::size_t s = 1; s < size; ++s) {
    double acc = 0.0;
    NodeSet rest = static_cast<NodeSet>(s);
    while (rest) {
      const int i = lowest_bit(rest);
      rest &= rest - 1;
      if ((children[static_cast<std::size_t>(i)] & static_cast<NodeSet>(s)) == 0)
        acc += count[without_bit(static_cast<NodeSet>(s), i)];
    }
    count[s] = acc;
  }
  return std::log(count[size - 1]);
}

double log_order_modular_joint(const FamilyScoreTable& beta, const Dag& g) {
  return log_linear_extensions(g) + beta.log_structure_joint(g);
}

double log_structure_evidence(const FamilyScoreTable& beta) {
  const int n = beta.n;
  check_guard(n, 22, "inclusion-exclusion evidence");
  // alpha_i over squeezed subsets, reused from the transform route.
  const std::vector<std::vector<double>> log_alpha = build_log_alpha(beta);
  const std::size_t size = std::size_t{1} << n;
  std::vector<SignedLog> h(size);
  h[0] = {0.0, +1};
  for (std::size_t s = 1; s < size; ++s) {
    SignedLog total;
    // All nonempty submasks t of s: t indexes the exact sink set.
    const NodeSet sm = static_cast<NodeSet>(s);
    for (NodeSet t = sm; t != 0; t = (t - 1) & sm) {
      const NodeSet w = sm & ~t;
      if (h[w].sign == 0) continue;
      double term = h[w].lg;
      NodeSet ts = t;
      while (ts) {
        const int i = lowest_bit(ts);
        ts &= ts - 1;
        term += log_alpha[static_cast<std::size_t>(i)][squeeze(w, i)];
      }
      const int parity = (popcount(t) % 2 == 1) ? +1 : -1;
      total.add(term, parity * h[w].sign);
    }
    h[s] = total;
  }
  if (h[size - 1].sign <= 0)
    throw std::runtime_error(
        "inclusion-exclusion evidence lost all precision (non-positive sum)");
  return h[size - 1].lg;
}

namespace {

// Shared enumeration-based posterior: weight(G) = beta-weight, optionally
// times the linear-extension count.
double enumeration_posterior(const FamilyScoreTable& beta,
                             const FeatureExpr& feature, bool order_weighted) {
  LogAccumulator total;
  LogAccumulator hit;
  for_each_dag(beta.n, beta.max_indegree, [&](const Dag& g) {
    double lw = beta.log_structure_joint(g);
    if (order_weighted) lw += log_linear_extensions(g);
    total.add(lw);
    if (eval_feature(feature, g)) hit.add(lw);
  });
  return std::exp(hit.value() - total.value());
}

std::vector<std::vector<double>> enumeration_edges(const FamilyScoreTable& beta,
                                                   bool order_weighted) {
  const int n = beta.n;
  // Pass 1: the max log weight, so pass 2 can accumulate in shifted linear
  // space per edge.
  double shift = kNegInf;
  for_each_dag(n, beta.max_indegree, [&](const Dag& g) {
    double lw = beta.log_structure_joint(g);
    if (order_weighted) lw += log_linear_extensions(g);
    shift = std::max(shift, lw);
  });
  std::vector<std::vector<double>> acc(
      static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  double total = 0.0;
  for_each_dag(n, beta.max_indegree, [&](const Dag& g) {
    double lw = beta.log_structure_joint(g);
    if (order_weighted) lw += log_linear_extensions(g);
    const double w = std::exp(lw - shift);
    total += w;
    for (int i = 0; i < n; ++i) {
      NodeSet pa = g.parents[static_cast<std::size_t>(i)];
      while (pa) {
        const int j = lowest_bit(pa);
        pa &= pa - 1;
        acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += w;
      }
    }
  });
  for (auto& row : acc)
    for (double& v : row) v /= total;
  return acc;
}

}  // namespace

double exact_feature_posterior_structure(const FamilyScoreTable& beta,
                                         const FeatureExpr& feature) {
  return enumeration_posterior(beta, feature, false);
}

double exact_feature_posterior_order(const FamilyScoreTable& beta,
                                     const FeatureExpr& feature) {
  return enumeration_posterior(beta, feature, true);
}

std::vector<std::vector<double>> exact_edges_structure(const FamilyScoreTable& beta) {
  return enumeration_edges(beta, false);
}

std::vector<std::vector<double>> exact_edges_order(const FamilyScoreTable& beta) {
  return enumeration_edges(beta, true);
}

}  // namespace dagsample
