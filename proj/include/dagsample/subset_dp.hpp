#pragma once

// Dynamic programming over the subset lattice for order-modular posteriors.
//
// With per-family weights beta_i(Pa) = rho_i(Pa) * score_i(Pa : D), define
//
//   alpha_i(S) = sum_{Pa subset of S, |Pa| <= k} beta_i(Pa)
//   L(S)       = sum over orderings of S of prod alpha factors (forward)
//   R(T)       = the mirrored accumulant over orderings that END with T
//
// via L({}) = 1, L(S) = sum_{i in S} alpha_i(S \ {i}) * L(S \ {i}), and
// R({}) = 1, R(T) = sum_{i in T} alpha_i(V \ T) * R(T \ {i}).  Then
// L(V) = R(V) is the total weight p(D) under the order-modular prior, the
// joint weight of one order factorizes over its prefixes, and exact edge
// posteriors decompose over (predecessor set, family) pairs.  All tables are
// stored in log space.

#include <vector>

#include "dagsample/common.hpp"
#include "dagsample/scores.hpp"
#include "dagsample/structures.hpp"

namespace dagsample {

struct DpTables {
  int n = 0;
  // log alpha_i over squeezed subsets of V \ {i}; n * 2^(n-1) entries.
  std::vector<std::vector<double>> log_alpha;
  // Forward / backward accumulants over all 2^n variable subsets.
  std::vector<double> log_l;
  std::vector<double> log_r;

  double log_alpha_at(int i, NodeSet s) const {
    return log_alpha[static_cast<std::size_t>(i)][squeeze(s, i)];
  }

  // log p(D) under the order-modular prior (= log L(V) = log R(V)).
  double log_order_evidence() const {
    return log_l[full_set(n)];
  }
};

// Subset-sum (zeta) transforms of the per-node beta tables.  The default
// route exponentiates each node's row about its maximum and runs one linear-
// space in-place transform; `truncated` instead runs one transform per parent-
// set size layer 0..k (identical results, exercised as a cross-check and
// useful when k is far below n-1).  Falls back to a pure log-space transform
// in the (never expected) event a row comes back non-finite.
std::vector<std::vector<double>> build_log_alpha(const FamilyScoreTable& beta,
                                                 bool truncated = false,
                                                 int workers = 1);

std::vector<double> forward_accumulants(int n, const std::vector<std::vector<double>>& log_alpha);
std::vector<double> backward_accumulants(int n, const std::vector<std::vector<double>>& log_alpha);

DpTables build_dp_tables(const FamilyScoreTable& beta, bool truncated = false,
                         int workers = 1);

// log of the joint weight of one total order: sum over positions of
// log alpha_{sigma(pos)}(predecessors).  Normalizing by log_order_evidence
// gives the order's posterior.
double log_order_joint(const DpTables& dp, const TotalOrder& order);

// log p(Pa_i = pa | order, D) for a node whose predecessor set is u.
// Requires pa subset of u (std::domain_error otherwise).
double parent_log_posterior_in_order(const FamilyScoreTable& beta,
                                     const DpTables& dp, int i, NodeSet pa,
                                     NodeSet u);

// p(j -> i | order, D) for a node with predecessor set u: zero when j is not
// a predecessor, else 1 - alpha_i(u \ {j}) / alpha_i(u).
double edge_posterior_in_order(const DpTables& dp, int j, int i, NodeSet u);

// Exact order-modular posterior of every ordered edge j -> i, computed by
// splitting on the predecessor set U of i:
//
//   p(j -> i | D) = sum_U [sum_{Pa subset of U, j in Pa} beta_i(Pa)]
//                          * L(U) * R(V \ U \ {i})  /  L(V)
//
// using one masked subset-sum transform per (i, j) pair.  Returned matrix is
// indexed [child][parent]; diagonal entries are zero.
std::vector<std::vector<double>> exact_edge_posteriors(
    const FamilyScoreTable& beta, const DpTables& dp, int workers = 1);

}  // namespace dagsample
