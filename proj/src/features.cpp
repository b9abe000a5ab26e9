#include "dagsample/features.hpp"

#include <cctype>
#include <optional>
#include <sstream>

namespace dagsample {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

FeaturePtr FeatureExpr::edge(int from, int to) {
  require(from >= 0 && to >= 0, "edge: node indices must be non-negative");
  require(from != to, "edge: endpoints must differ");
  auto f = std::shared_ptr<FeatureExpr>(new FeatureExpr(Kind::kEdge));
  f->a_ = from;
  f->b_ = to;
  return f;
}

FeaturePtr FeatureExpr::path(int from, int to) {
  require(from >= 0 && to >= 0, "path: node indices must be non-negative");
  require(from != to, "path: endpoints must differ");
  auto f = std::shared_ptr<FeatureExpr>(new FeatureExpr(Kind::kPath));
  f->a_ = from;
  f->b_ = to;
  return f;
}

FeaturePtr FeatureExpr::path_len(int from, int to, int max_edges) {
  require(from >= 0 && to >= 0, "pathlen: node indices must be non-negative");
  require(from != to, "pathlen: endpoints must differ");
  require(max_edges >= 1, "pathlen: the edge bound must be at least 1");
  auto f = std::shared_ptr<FeatureExpr>(new FeatureExpr(Kind::kPathLen));
  f->a_ = from;
  f->b_ = to;
  f->length_bound_ = max_edges;
  return f;
}

FeaturePtr FeatureExpr::parent_set_is(int node, NodeSet parents) {
  require(node >= 0, "parents: node index must be non-negative");
  require(!contains(parents, node), "parents: a node cannot parent itself");
  auto f = std::shared_ptr<FeatureExpr>(new FeatureExpr(Kind::kParentSetIs));
  f->a_ = node;
  f->parent_set_ = parents;
  return f;
}

FeaturePtr FeatureExpr::modular(std::vector<std::function<bool(NodeSet)>> preds) {
  auto f = std::shared_ptr<FeatureExpr>(new FeatureExpr(Kind::kModular));
  f->node_predicates_ = std::move(preds);
  return f;
}

FeaturePtr FeatureExpr::logical_and(FeaturePtr l, FeaturePtr r) {
  require(l && r, "and: missing operand");
  auto f = std::shared_ptr<FeatureExpr>(new FeatureExpr(Kind::kAnd));
  f->lhs_ = std::move(l);
  f->rhs_ = std::move(r);
  return f;
}

FeaturePtr FeatureExpr::logical_or(FeaturePtr l, FeaturePtr r) {
  require(l && r, "or: missing operand");
  auto f = std::shared_ptr<FeatureExpr>(new FeatureExpr(Kind::kOr));
  f->lhs_ = std::move(l);
  f->rhs_ = std::move(r);
  return f;
}

FeaturePtr FeatureExpr::logical_not(FeaturePtr inner) {
  require(static_cast<bool>(inner), "not: missing operand");
  auto f = std::shared_ptr<FeatureExpr>(new FeatureExpr(Kind::kNot));
  f->lhs_ = std::move(inner);
  return f;
}

DagClosure::DagClosure(const Dag& g) : dag_(&g) {
  const int n = g.n;
  // Child adjacency from the parent masks.
  std::vector<NodeSet> children(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    NodeSet pa = g.parents[static_cast<std::size_t>(i)];
    while (pa) {
      const int p = lowest_bit(pa);
      pa &= pa - 1;
      children[static_cast<std::size_t>(p)] = with_bit(children[static_cast<std::size_t>(p)], i);
    }
  }
  // Topological order (parents first), then propagate descendant masks from
  // the back so every child is finished before its parents.
  std::vector<int> topo;
  topo.reserve(static_cast<std::size_t>(n));
  std::vector<NodeSet> pending = g.parents;
  NodeSet placed = 0;
  for (int step = 0; step < n; ++step) {
    int next = -1;
    for (int i = 0; i < n; ++i)
      if (!contains(placed, i) && (pending[static_cast<std::size_t>(i)] & ~placed) == 0) {
        next = i;
        break;
      }
    if (next < 0) throw std::invalid_argument("closure requires an acyclic graph");
    topo.push_back(next);
    placed = with_bit(placed, next);
  }
  descendants_.assign(static_cast<std::size_t>(n), 0);
  for (int t = n; t-- > 0;) {
    const int u = topo[static_cast<std::size_t>(t)];
    NodeSet d = children[static_cast<std::size_t>(u)];
    NodeSet c = children[static_cast<std::size_t>(u)];
    while (c) {
      const int v = lowest_bit(c);
      c &= c - 1;
      d |= descendants_[static_cast<std::size_t>(v)];
    }
    descendants_[static_cast<std::size_t>(u)] = d;
  }
}

namespace {

bool reaches_within(const Dag& g, int from, int to, int max_edges) {
  const int n = g.n;
  std::vector<NodeSet> children(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    NodeSet pa = g.parents[static_cast<std::size_t>(i)];
    while (pa) {
      const int p = lowest_bit(pa);
      pa &= pa - 1;
      children[static_cast<std::size_t>(p)] = with_bit(children[static_cast<std::size_t>(p)], i);
    }
  }
  NodeSet frontier = with_bit(0, from);
  NodeSet reached = 0;
  for (int step = 0; step < max_edges && frontier; ++step) {
    NodeSet next = 0;
    NodeSet f = frontier;
    while (f) {
      const int u = lowest_bit(f);
      f &= f - 1;
      next |= children[static_cast<std::size_t>(u)];
    }
    next &= ~reached;
    if (contains(next, to)) return true;
    reached |= next;
    frontier = next;
  }
  return false;
}

bool eval_rec(const FeatureExpr& f, const Dag& g,
              const DagClosure*& closure, std::optional<DagClosure>& local) {
  switch (f.kind()) {
    case FeatureExpr::Kind::kEdge:
      return g.has_edge(f.a(), f.b());
    case FeatureExpr::Kind::kPath:
      if (!closure) {
        local.emplace(g);
        closure = &*local;
      }
      return closure->reaches(f.a(), f.b());
    case FeatureExpr::Kind::kPathLen:
      return reaches_within(g, f.a(), f.b(), f.length_bound());
    case FeatureExpr::Kind::kParentSetIs:
      return g.parents[static_cast<std::size_t>(f.a())] == f.parent_set();
    case FeatureExpr::Kind::kModular: {
      const auto& preds = f.node_predicates();
      if (static_cast<int>(preds.size()) != g.n)
        throw std::invalid_argument("modular feature arity differs from graph");
      for (int i = 0; i < g.n; ++i)
        if (preds[static_cast<std::size_t>(i)] &&
            !preds[static_cast<std::size_t>(i)](g.parents[static_cast<std::size_t>(i)]))
          return false;
      return true;
    }
    case FeatureExpr::Kind::kAnd:
      return eval_rec(*f.lhs(), g, closure, local) &&
             eval_rec(*f.rhs(), g, closure, local);
    case FeatureExpr::Kind::kOr:
      return eval_rec(*f.lhs(), g, closure, local) ||
             eval_rec(*f.rhs(), g, closure, local);
    case FeatureExpr::Kind::kNot:
      return !eval_rec(*f.lhs(), g, closure, local);
  }
  return false;  // unreachable
}

}  // namespace

bool eval_feature(const FeatureExpr& feature, const Dag& g,
                  const DagClosure* closure) {
  std::optional<DagClosure> local;
  const DagClosure* c = closure;
  return eval_rec(feature, g, c, local);
}

std::string FeatureExpr::to_string(const std::vector<std::string>& names) const {
  const auto name = [&names](int idx) {
    return idx >= 0 && idx < static_cast<int>(names.size())
               ? names[static_cast<std::size_t>(idx)]
               : "#" + std::to_string(idx);
  };
  std::ostringstream out;
  switch (kind_) {
    case Kind::kEdge:
      out << "edge(" << name(a_) << "," << name(b_) << ")";
      break;
    case Kind::kPath:
      out << "path(" << name(a_) << "," << name(b_) << ")";
      break;
    case Kind::kPathLen:
      out << "pathlen(" << name(a_) << "," << name(b_) << "," << length_bound_ << ")";
      break;
    case Kind::kParentSetIs: {
      out << "parents(" << name(a_) << ",{";
      bool first = true;
      for (int p : set_bits(parent_set_)) {
        if (!first) out << ",";
        out << name(p);
        first = false;
      }
      out << "})";
      break;
    }
    case Kind::kModular:
      out << "<modular>";
      break;
    case Kind::kAnd:
      out << "(" << lhs_->to_string(names) << " & " << rhs_->to_string(names) << ")";
      break;
    case Kind::kOr:
      out << "(" << lhs_->to_string(names) << " | " << rhs_->to_string(names) << ")";
      break;
    case Kind::kNot:
      out << "!" << lhs_->to_string(names);
      break;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum class Type { kAtom, kPunct, kEnd };
  Type type = Type::kEnd;
  std::string text;
  char punct = 0;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

 private:
  static bool is_punct(char c) {
    return c == '(' || c == ')' || c == '{' || c == '}' || c == ',' ||
           c == '!' || c == '&' || c == '|';
  }

  void advance() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    current_ = Token{};
    current_.offset = pos_;
    if (pos_ >= text_.size()) {
      current_.type = Token::Type::kEnd;
      return;
    }
    const char c = text_[pos_];
    if (is_punct(c)) {
      current_.type = Token::Type::kPunct;
      current_.punct = c;
      ++pos_;
      return;
    }
    std::size_t end = pos_;
    while (end < text_.size() && !is_punct(text_[end]) &&
           !std::isspace(static_cast<unsigned char>(text_[end])))
      ++end;
    current_.type = Token::Type::kAtom;
    current_.text = text_.substr(pos_, end - pos_);
    pos_ = end;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  Token current_;
};

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& names)
      : lexer_(text), names_(names) {}

  FeaturePtr parse() {
    FeaturePtr f = parse_or();
    if (lexer_.peek().type != Token::Type::kEnd)
      fail("unexpected trailing input", lexer_.peek().offset);
    return f;
  }

 private:
  [[noreturn]] static void fail(const std::string& what, std::size_t offset) {
    throw FeatureParseError(what, offset);
  }

  void expect_punct(char c) {
    const Token& t = lexer_.peek();
    if (t.type != Token::Type::kPunct || t.punct != c)
      fail(std::string("expected '") + c + "'", t.offset);
    lexer_.take();
  }

  bool try_punct(char c) {
    const Token& t = lexer_.peek();
    if (t.type == Token::Type::kPunct && t.punct == c) {
      lexer_.take();
      return true;
    }
    return false;
  }

  FeaturePtr parse_or() {
    FeaturePtr f = parse_and();
    while (try_punct('|')) f = FeatureExpr::logical_or(f, parse_and());
    return f;
  }

  FeaturePtr parse_and() {
    FeaturePtr f = parse_unary();
    while (try_punct('&')) f = FeatureExpr::logical_and(f, parse_unary());
    return f;
  }

  FeaturePtr parse_unary() {
    if (try_punct('!')) return FeatureExpr::logical_not(parse_unary());
    if (try_punct('(')) {
      FeaturePtr f = parse_or();
      expect_punct(')');
      return f;
    }
    return parse_call();
  }

  int parse_node() {
    const Token t = lexer_.take();
    if (t.type != Token::Type::kAtom) fail("expected a variable name", t.offset);
    for (std::size_t j = 0; j < names_.size(); ++j)
      if (names_[j] == t.text) return static_cast<int>(j);
    // Fallback: a numeric token that names no column is a raw index.
    try {
      std::size_t used = 0;
      const int idx = std::stoi(t.text, &used);
      if (used == t.text.size() && idx >= 0 &&
          idx < static_cast<int>(names_.size()))
        return idx;
    } catch (const std::exception&) {
    }
    fail("unknown variable '" + t.text + "'", t.offset);
  }

  int parse_int() {
    const Token t = lexer_.take();
    if (t.type != Token::Type::kAtom) fail("expected an integer", t.offset);
    try {
      std::size_t used = 0;
      const int v = std::stoi(t.text, &used);
      if (used == t.text.size()) return v;
    } catch (const std::exception&) {
    }
    fail("expected an integer, got '" + t.text + "'", t.offset);
  }

  FeaturePtr parse_call() {
    const Token t = lexer_.take();
    if (t.type != Token::Type::kAtom)
      fail("expected a feature primitive", t.offset);
    const std::string& fn = t.text;
    try {
      if (fn == "edge" || fn == "path") {
        expect_punct('(');
        const int a = parse_node();
        expect_punct(',');
        const int b = parse_node();
        expect_punct(')');
        return fn == "edge" ? FeatureExpr::edge(a, b) : FeatureExpr::path(a, b);
      }
      if (fn == "pathlen") {
        expect_punct('(');
        const int a = parse_node();
        expect_punct(',');
        const int b = parse_node();
        expect_punct(',');
        const int len = parse_int();
        expect_punct(')');
        return FeatureExpr::path_len(a, b, len);
      }
      if (fn == "parents") {
        expect_punct('(');
        const int a = parse_node();
        expect_punct(',');
        expect_punct('{');
        NodeSet pa = 0;
        if (!try_punct('}')) {
          pa = with_bit(pa, parse_node());
          while (try_punct(',')) pa = with_bit(pa, parse_node());
          expect_punct('}');
        }
        expect_punct(')');
        return FeatureExpr::parent_set_is(a, pa);
      }
    } catch (const std::invalid_argument& e) {
      fail(e.what(), t.offset);
    }
    fail("unknown feature primitive '" + fn + "'", t.offset);
  }

  Lexer lexer_;
  const std::vector<std::string>& names_;
};

}  // namespace

FeaturePtr parse_feature(const std::string& text,
                         const std::vector<std::string>& names) {
  return Parser(text, names).parse();
}

}  // namespace dagsample
