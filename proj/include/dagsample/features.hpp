#pragma once

// Structural features: boolean functions of a DAG whose posterior
// probability the estimators report.  Features form an expression tree over
// the primitives
//
//   edge(a, b)        edge a -> b is present
//   path(a, b)        a directed path (>= 1 edge) from a to b exists
//   pathlen(a, b, L)  such a path with at most L edges exists
//   parents(a, {..})  node a has exactly the given parent set
//
// combined with !, & and | (precedence: ! over & over |; parentheses allowed).
// A parser turns the textual grammar into a tree, resolving node names
// against dataset column names (or numeric indices as a fallback).

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dagsample/common.hpp"
#include "dagsample/structures.hpp"

namespace dagsample {

class FeatureExpr;
using FeaturePtr = std::shared_ptr<const FeatureExpr>;

class FeatureExpr {
 public:
  enum class Kind { kEdge, kPath, kPathLen, kParentSetIs, kModular, kAnd, kOr, kNot };

  Kind kind() const { return kind_; }
  int a() const { return a_; }
  int b() const { return b_; }
  int length_bound() const { return length_bound_; }
  NodeSet parent_set() const { return parent_set_; }
  const FeaturePtr& lhs() const { return lhs_; }
  const FeaturePtr& rhs() const { return rhs_; }
  // Modular features: one predicate per node over its parent set.  A DAG
  // satisfies the feature iff every per-node predicate holds.  Posteriors of
  // such features admit closed-form exact references.
  const std::vector<std::function<bool(NodeSet)>>& node_predicates() const {
    return node_predicates_;
  }

  // Factories (validating): indices must be distinct where required.
  static FeaturePtr edge(int from, int to);
  static FeaturePtr path(int from, int to);
  static FeaturePtr path_len(int from, int to, int max_edges);
  static FeaturePtr parent_set_is(int node, NodeSet parents);
  static FeaturePtr modular(std::vector<std::function<bool(NodeSet)>> preds);
  static FeaturePtr logical_and(FeaturePtr l, FeaturePtr r);
  static FeaturePtr logical_or(FeaturePtr l, FeaturePtr r);
  static FeaturePtr logical_not(FeaturePtr inner);

  // Human-readable round-trip of the expression (indices as names[]).
  std::string to_string(const std::vector<std::string>& names) const;

 private:
  explicit FeatureExpr(Kind kind) : kind_(kind) {}

  Kind kind_;
  int a_ = -1;
  int b_ = -1;
  int length_bound_ = 0;
  NodeSet parent_set_ = 0;
  std::vector<std::function<bool(NodeSet)>> node_predicates_;
  FeaturePtr lhs_;
  FeaturePtr rhs_;
};

// Per-DAG reachability memo: closure.reaches(u, v) <=> a directed path of at
// least one edge leads from u to v.  Building is O(n^2 / word) via reverse
// topological propagation of descendant masks.
class DagClosure {
 public:
  explicit DagClosure(const Dag& g);
  bool reaches(int from, int to) const {
    return contains(descendants_[static_cast<std::size_t>(from)], to);
  }
  const Dag& dag() const { return *dag_; }

 private:
  const Dag* dag_;
  std::vector<NodeSet> descendants_;
};

// Evaluates a feature on a DAG.  A caller evaluating several features on the
// same DAG can pass a prebuilt closure to share the reachability work.
bool eval_feature(const FeatureExpr& feature, const Dag& g,
                  const DagClosure* closure = nullptr);

// Raised on malformed feature text; `offset` is the byte position of the
// problem within the input string.
class FeatureParseError : public std::runtime_error {
 public:
  FeatureParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Parses the textual grammar.  Node tokens are resolved against `names`
// first; a token that matches no name but is a valid integer below n is
// taken as a node index.
FeaturePtr parse_feature(const std::string& text,
                         const std::vector<std::string>& names);

}  // namespace dagsample
