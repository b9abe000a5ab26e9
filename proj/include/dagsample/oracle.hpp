#pragma once

// Exact references for validation.  Everything here is exponential-time (or
// worse) by design: enumeration over all DAGs, exact linear-extension
// counting, and the inclusion-exclusion evidence under the structure-modular
// prior.  Guards keep the instance sizes honest; the test suite and the
// acceptance gate compare the fast paths against these on small inputs.

#include <functional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dagsample/features.hpp"
#include "dagsample/scores.hpp"
#include "dagsample/structures.hpp"

namespace dagsample {

// Visits every DAG over n nodes with in-degree at most k, assigning parent
// sets node by node and recursing only while the partial graph is acyclic.
// Guard: n <= 6 (3,781,503 DAGs at n = 6).
void for_each_dag(int n, int max_indegree,
                  const std::function<void(const Dag&)>& visit);
std::vector<Dag> enumerate_dags(int n, int max_indegree);

// Exact number of linear extensions via the sink-removal subset recurrence
// N(S) = sum over sinks i of N(S \ {i}).  Guard: n <= 20 (the table holds
// 2^n big integers).
boost::multiprecision::cpp_int count_linear_extensions(const Dag& g);

// Same recurrence carried in doubles (counts stay below 25! < 2^84, so the
// only loss is rounding), returning the natural log.  Guard: n <= 25.
double log_linear_extensions(const Dag& g);

// log of the joint weight of (G, D) under the order-modular prior, which
// overweights each DAG by its number of linear extensions:
// log |extensions(G)| + log beta-weight(G).
double log_order_modular_joint(const FamilyScoreTable& beta, const Dag& g);

// log sum over all DAGs of their beta-weight — the exact evidence under the
// structure-modular prior — by inclusion-exclusion over exact sink sets:
//
//   H({}) = 1,
//   H(S)  = sum_{nonempty T subset of S} (-1)^(|T|+1)
//             * prod_{i in T} alpha_i(S \ T) * H(S \ T),
//
// giving H(V) = sum_G prod_i beta_i(Pa_i).  Alternating terms are combined
// in signed log space.  O(3^n * n) time; guard: n <= 22.
double log_structure_evidence(const FamilyScoreTable& beta);

// Exact posterior of a feature by enumeration, under the structure-modular
// prior (each DAG weighted by its beta-weight) and under the order-modular
// prior (additionally weighted by its linear-extension count).
// Guard: n <= 6.
double exact_feature_posterior_structure(const FamilyScoreTable& beta,
                                         const FeatureExpr& feature);
double exact_feature_posterior_order(const FamilyScoreTable& beta,
                                     const FeatureExpr& feature);

// Per-edge matrices ([child][parent]) of the same two posteriors, computed
// in one enumeration pass each.  Guard: n <= 6.
std::vector<std::vector<double>> exact_edges_structure(const FamilyScoreTable& beta);
std::vector<std::vector<double>> exact_edges_order(const FamilyScoreTable& beta);

}  // namespace dagsample
