#pragma once
// formula.hpp — hash-consed CTL* formulas in core syntax and closure sets.
//
// Core connectives: atoms, the `true` constant, ~, &, X, U, A.  Everything
// else (false, |, ->, <->, E, F, G) is sugar and is eliminated by the
// builders / the parser, so downstream code only ever sees the core kinds.

#include <boost/dynamic_bitset.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace ctlstar {

using FormulaId = std::uint32_t;
inline constexpr FormulaId kNoFormula = 0xffffffffu;

/// Dense member-index set over a ClosureSet (also used for phues).
using MemberSet = boost::dynamic_bitset<>;

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

enum class Kind : std::uint8_t { Atom, True, Neg, And, Next, Until, All };

struct FormulaNode {
  Kind kind;
  FormulaId a = kNoFormula;  ///< only / left child
  FormulaId b = kNoFormula;  ///< right child (And, Until)
  std::uint32_t atom = 0;    ///< atom-name table index (Kind::Atom)
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " (at offset " + std::to_string(pos) + ")"),
        pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

// ─────────────────────────────────────────────────────────────────────────────
// FormulaTable
// ─────────────────────────────────────────────────────────────────────────────

class FormulaTable {
 public:
  FormulaTable() = default;

  // Core constructors; structurally identical formulas share one id.
  FormulaId atom(std::string_view name) {
    auto it = atom_ids_.find(std::string(name));
    std::uint32_t ai;
    if (it != atom_ids_.end()) {
      ai = it->second;
    } else {
      ai = static_cast<std::uint32_t>(atom_names_.size());
      atom_names_.emplace_back(name);
      atom_ids_.emplace(atom_names_.back(), ai);
    }
    return intern({Kind::Atom, kNoFormula, kNoFormula, ai});
  }
  FormulaId verum() { return intern({Kind::True, kNoFormula, kNoFormula, 0}); }
  FormulaId neg(FormulaId x) { return intern({Kind::Neg, x, kNoFormula, 0}); }
  FormulaId conj(FormulaId l, FormulaId r) { return intern({Kind::And, l, r, 0}); }
  FormulaId next(FormulaId x) { return intern({Kind::Next, x, kNoFormula, 0}); }
  FormulaId until(FormulaId l, FormulaId r) { return intern({Kind::Until, l, r, 0}); }
  FormulaId all(FormulaId x) { return intern({Kind::All, x, kNoFormula, 0}); }

  // Sugar, desugared on the spot.
  FormulaId falsum() { return neg(verum()); }
  FormulaId disj(FormulaId l, FormulaId r) { return neg(conj(neg(l), neg(r))); }
  FormulaId implies(FormulaId l, FormulaId r) { return neg(conj(l, neg(r))); }
  FormulaId iff(FormulaId l, FormulaId r) {
    return conj(implies(l, r), implies(r, l));
  }
  FormulaId exists(FormulaId x) { return neg(all(neg(x))); }
  FormulaId future(FormulaId x) { return until(verum(), x); }
  FormulaId globally(FormulaId x) { return neg(until(verum(), neg(x))); }

  const FormulaNode& node(FormulaId id) const { return nodes_[id]; }
  Kind kind(FormulaId id) const { return nodes_[id].kind; }
  const std::string& atom_name(FormulaId id) const {
    return atom_names_[nodes_[id].atom];
  }
  std::size_t table_size() const { return nodes_.size(); }

  /// Number of core-syntax nodes, counting repeated subtrees once per
  /// occurrence (tree size, not DAG size).
  std::uint64_t node_count(FormulaId id) const {
    if (id < tree_size_.size() && tree_size_[id] != 0) return tree_size_[id];
    const FormulaNode& n = nodes_[id];
    std::uint64_t c = 1;
    if (n.a != kNoFormula) c += node_count(n.a);
    if (n.b != kNoFormula) c += node_count(n.b);
    if (id >= tree_size_.size()) tree_size_.resize(id + 1, 0);
    tree_size_[id] = c;
    return c;
  }

  /// Strips top-level double negations: ~~x collapses to (collapsed) x.
  FormulaId collapse(FormulaId id) const {
    while (nodes_[id].kind == Kind::Neg &&
           nodes_[nodes_[id].a].kind == Kind::Neg) {
      id = nodes_[nodes_[id].a].a;
    }
    return id;
  }

  /// Collapsed negation: for collapsed m, returns the collapsed form of ~m.
  FormulaId negate_collapsed(FormulaId m) {
    m = collapse(m);
    if (nodes_[m].kind == Kind::Neg) return nodes_[m].a;
    return neg(m);
  }

  /// True iff the formula mentions the A connective anywhere.
  bool mentions_allpaths(FormulaId id) const {
    const FormulaNode& n = nodes_[id];
    if (n.kind == Kind::All) return true;
    if (n.a != kNoFormula && mentions_allpaths(n.a)) return true;
    if (n.b != kNoFormula && mentions_allpaths(n.b)) return true;
    return false;
  }

  FormulaId parse(std::string_view text);
  std::string render(FormulaId id) const;

 private:
  FormulaId intern(const FormulaNode& n) {
    std::uint64_t key = pack(n);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    FormulaId id = static_cast<FormulaId>(nodes_.size());
    nodes_.push_back(n);
    index_.emplace(key, id);
    return id;
  }
  static std::uint64_t pack(const FormulaNode& n) {
    // Children / atom index fit in 28 bits each for any realistic table.
    std::uint64_t x = static_cast<std::uint64_t>(n.kind);
    std::uint64_t a = (n.kind == Kind::Atom) ? n.atom : n.a;
    return x | (static_cast<std::uint64_t>(a + 1) << 4) |
           (static_cast<std::uint64_t>(n.b + 1) << 34);
  }
  void render_into(FormulaId id, std::string& out, int parent_prec) const;

  std::vector<FormulaNode> nodes_;
  std::unordered_map<std::uint64_t, FormulaId> index_;
  std::vector<std::string> atom_names_;
  std::unordered_map<std::string, std::uint32_t> atom_ids_;
  mutable std::vector<std::uint64_t> tree_size_;
};

// ─────────────────────────────────────────────────────────────────────────────
// Parser
//
// Grammar (ASCII):
//   formula  := implies ('<->' formula)?          right-assoc
//   implies  := or ('->' implies)?                right-assoc
//   or       := and ('|' and)*                    left-assoc
//   and      := until ('&' until)*                left-assoc
//   until    := unary ('U' until)?                right-assoc
//   unary    := ('~'|'A'|'E'|'X'|'F'|'G') unary | primary
//   primary  := '(' formula ')' | 'true' | 'false' | atom
//   atom     := [a-z][a-z0-9_]*
// Unary operators bind tightest and stack, so "AFGq" reads as A(F(G(q))).
// ─────────────────────────────────────────────────────────────────────────────

namespace detail {

class Parser {
 public:
  Parser(FormulaTable& t, std::string_view text) : t_(t), text_(text) {}

  FormulaId run() {
    FormulaId f = parse_iff();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
    return f;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r' ||
            text_[pos_] == '\n'))
      ++pos_;
  }
  bool match(std::string_view s) {
    skip_ws();
    if (text_.substr(pos_, s.size()) == s) {
      pos_ += s.size();
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  FormulaId parse_iff() {
    FormulaId l = parse_implies();
    if (match("<->")) return t_.iff(l, parse_iff());
    return l;
  }
  FormulaId parse_implies() {
    FormulaId l = parse_or();
    if (match("->")) return t_.implies(l, parse_implies());
    return l;
  }
  FormulaId parse_or() {
    FormulaId l = parse_and();
    while (peek() == '|') {
      ++pos_;
      l = t_.disj(l, parse_and());
    }
    return l;
  }
  FormulaId parse_and() {
    FormulaId l = parse_until();
    while (peek() == '&') {
      ++pos_;
      l = t_.conj(l, parse_until());
    }
    return l;
  }
  FormulaId parse_until() {
    FormulaId l = parse_unary();
    if (peek() == 'U') {
      ++pos_;
      return t_.until(l, parse_until());
    }
    return l;
  }
  FormulaId parse_unary() {
    switch (peek()) {
      case '~': ++pos_; return t_.neg(parse_unary());
      case 'A': ++pos_; return t_.all(parse_unary());
      case 'E': ++pos_; return t_.exists(parse_unary());
      case 'X': ++pos_; return t_.next(parse_unary());
      case 'F': ++pos_; return t_.future(parse_unary());
      case 'G': ++pos_; return t_.globally(parse_unary());
      default: return parse_primary();
    }
  }
  FormulaId parse_primary() {
    char c = peek();
    if (c == '(') {
      ++pos_;
      FormulaId f = parse_iff();
      if (peek() != ')') throw ParseError("expected ')'", pos_);
      ++pos_;
      return f;
    }
    if (c >= 'a' && c <= 'z') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             ((text_[pos_] >= 'a' && text_[pos_] <= 'z') ||
              (text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '_'))
        ++pos_;
      std::string_view name = text_.substr(start, pos_ - start);
      if (name == "true") return t_.verum();
      if (name == "false") return t_.falsum();
      return t_.atom(name);
    }
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  FormulaTable& t_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline FormulaId FormulaTable::parse(std::string_view text) {
  return detail::Parser(*this, text).run();
}

// Renderer: emits core syntax only, with minimal parentheses.  Precedence
// levels: unary / primary 5, U 3, & 2.
inline void FormulaTable::render_into(FormulaId id, std::string& out,
                                      int parent_prec) const {
  const FormulaNode& n = nodes_[id];
  auto unary_child = [&](FormulaId c) { render_into(c, out, 5); };
  switch (n.kind) {
    case Kind::Atom: out += atom_names_[n.atom]; break;
    case Kind::True: out += "true"; break;
    case Kind::Neg: out.push_back('~'); unary_child(n.a); break;
    case Kind::Next: out.push_back('X'); unary_child(n.a); break;
    case Kind::All: out.push_back('A'); unary_child(n.a); break;
    case Kind::And: {
      bool wrap = parent_prec > 2;
      if (wrap) out.push_back('(');
      render_into(n.a, out, 2);   // left child at equal prec keeps left-assoc
      out += " & ";
      render_into(n.b, out, 3);
      if (wrap) out.push_back(')');
      break;
    }
    case Kind::Until: {
      bool wrap = parent_prec > 3;
      if (wrap) out.push_back('(');
      render_into(n.a, out, 4);   // left child needs parens at equal prec
      out += " U ";
      render_into(n.b, out, 3);
      if (wrap) out.push_back(')');
      break;
    }
  }
}

inline std::string FormulaTable::render(FormulaId id) const {
  std::string out;
  render_into(id, out, 0);
  return out;
}

// ─────────────────────────────────────────────────────────────────────────────
// ClosureSet
//
// members = { collapse(ψ), collapse(~ψ) : ψ a subformula of φ }.  Collapsing
// top-level double negations makes negation_of a total involution on member
// indices.  Members are indexed densely in discovery order (root first).
// ─────────────────────────────────────────────────────────────────────────────

/// Syntactic shape of a (collapsed) closure member.  Every member falls in
/// exactly one class; FNeg* wrap a non-negated body.
enum class MemberForm : std::uint8_t {
  FAtom,
  FTrue,
  FFalse,     // ~true
  FNegAtom,
  FAnd,
  FNegAnd,
  FNext,
  FNegNext,
  FUntil,
  FNegUntil,
  FAll,
  FNegAll,
};

class ClosureSet {
 public:
  ClosureSet(FormulaTable& t, FormulaId root) : t_(&t), root_(root) {
    // Collect literal subformulas (each distinct subtree once), adding the
    // collapsed form and its collapsed negation as a member pair.
    std::vector<FormulaId> stack{root};
    std::unordered_map<FormulaId, bool> seen;
    while (!stack.empty()) {
      FormulaId f = stack.back();
      stack.pop_back();
      if (seen.count(f)) continue;
      seen.emplace(f, true);
      add_member(t.collapse(f));
      add_member(t.negate_collapsed(f));
      const FormulaNode& n = t.node(f);
      if (n.b != kNoFormula) stack.push_back(n.b);
      if (n.a != kNoFormula) stack.push_back(n.a);  // left child discovered first
    }
    finish();
  }

  FormulaTable& table() const { return *t_; }
  std::size_t size() const { return members_.size(); }
  std::size_t pair_count() const { return members_.size() / 2; }
  FormulaId member(std::size_t i) const { return members_[i]; }
  FormulaId root_formula() const { return root_; }
  std::size_t root_index() const { return index_.at(t_->collapse(root_)); }

  std::optional<std::size_t> index_of(FormulaId f) const {
    auto it = index_.find(t_->collapse(f));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t negation_of(std::size_t i) const { return negation_[i]; }
  MemberForm form(std::size_t i) const { return form_[i]; }
  /// Member index of the (collapsed) first operand; kNoIndex if none.  For
  /// negated forms the operands are those of the body: op0 of ~(a U b) is a.
  std::size_t op0(std::size_t i) const { return op0_[i]; }
  std::size_t op1(std::size_t i) const { return op1_[i]; }

  const std::vector<std::size_t>& atom_members() const { return atom_members_; }
  std::optional<std::size_t> true_index() const { return true_index_; }

  MemberSet empty_set() const { return MemberSet(members_.size()); }
  std::string render_member(std::size_t i) const { return t_->render(members_[i]); }

  /// M1: of each negation pair exactly one is present.  M2: a conjunction
  /// member is present iff both conjuncts are.
  bool is_mpc(const MemberSet& a) const {
    for (std::size_t i = 0; i < size(); ++i) {
      std::size_t ni = negation_[i];
      if (i < ni && a.test(i) == a.test(ni)) return false;
      if (form_[i] == MemberForm::FAnd &&
          a.test(i) != (a.test(op0_[i]) && a.test(op1_[i])))
        return false;
    }
    return true;
  }

 private:
  void add_member(FormulaId f) {
    if (index_.count(f)) return;
    index_.emplace(f, members_.size());
    members_.push_back(f);
  }

  void finish() {
    std::size_t n = members_.size();
    negation_.resize(n);
    form_.resize(n);
    op0_.assign(n, kNoIndex);
    op1_.assign(n, kNoIndex);
    for (std::size_t i = 0; i < n; ++i) {
      FormulaId m = members_[i];
      negation_[i] = index_.at(t_->negate_collapsed(m));
      const FormulaNode& nd = t_->node(m);
      bool negated = nd.kind == Kind::Neg;
      const FormulaNode& body = negated ? t_->node(nd.a) : nd;
      switch (body.kind) {
        case Kind::Atom:
          form_[i] = negated ? MemberForm::FNegAtom : MemberForm::FAtom;
          if (negated) op0_[i] = negation_[i];
          else atom_members_.push_back(i);
          break;
        case Kind::True:
          form_[i] = negated ? MemberForm::FFalse : MemberForm::FTrue;
          if (!negated) true_index_ = i;
          break;
        case Kind::And:
          form_[i] = negated ? MemberForm::FNegAnd : MemberForm::FAnd;
          op0_[i] = index_.at(t_->collapse(body.a));
          op1_[i] = index_.at(t_->collapse(body.b));
          break;
        case Kind::Next:
          form_[i] = negated ? MemberForm::FNegNext : MemberForm::FNext;
          op0_[i] = index_.at(t_->collapse(body.a));
          break;
        case Kind::Until:
          form_[i] = negated ? MemberForm::FNegUntil : MemberForm::FUntil;
          op0_[i] = index_.at(t_->collapse(body.a));
          op1_[i] = index_.at(t_->collapse(body.b));
          break;
        case Kind::All:
          form_[i] = negated ? MemberForm::FNegAll : MemberForm::FAll;
          op0_[i] = index_.at(t_->collapse(body.a));
          break;
        case Kind::Neg:
          // unreachable: members are collapsed
          throw std::logic_error("closure member not collapsed");
      }
    }
  }

  FormulaTable* t_;
  FormulaId root_;
  std::vector<FormulaId> members_;
  std::unordered_map<FormulaId, std::size_t> index_;
  std::vector<std::size_t> negation_;
  std::vector<MemberForm> form_;
  std::vector<std::size_t> op0_, op1_;
  std::vector<std::size_t> atom_members_;
  std::optional<std::size_t> true_index_;
};

/// Renders a member set as {m1, m2, ...} in index order (debug / serialization).
inline std::string render_set(const ClosureSet& cl, const MemberSet& s) {
  std::string out = "{";
  bool first = true;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    if (!s.test(i)) continue;
    if (!first) out += ", ";
    out += cl.render_member(i);
    first = false;
  }
  out += "}";
  return out;
}

namespace detail {

/// A-subformulas of the collected roots in innermost-first order, with
/// reduction to pseudo-atoms ("@0", "@1", ...), names the user grammar
/// cannot produce.  Shared by the model-checking oracle and the loop check.
class AllpathsRegistry {
 public:
  explicit AllpathsRegistry(FormulaTable& t) : t_(&t) {}

  void collect(FormulaId f) {
    if (!seen_.insert(f).second) return;
    const FormulaNode& n = t_->node(f);
    if (n.a != kNoFormula) collect(n.a);
    if (n.b != kNoFormula) collect(n.b);
    if (n.kind == Kind::All && !index_.count(f)) {
      index_.emplace(f, entries_.size());
      entries_.push_back(f);
    }
  }

  std::size_t size() const { return entries_.size(); }
  FormulaId entry(std::size_t k) const { return entries_[k]; }
  FormulaId body(std::size_t k) const { return t_->node(entries_[k]).a; }
  std::size_t index_of(FormulaId f) const { return index_.at(f); }

  static std::string pseudo_name(std::size_t k) {
    return "@" + std::to_string(k);
  }

  /// `f` with every maximal A-subterm replaced by its pseudo-atom.
  FormulaId reduce(FormulaId f) {
    auto it = red_.find(f);
    if (it != red_.end()) return it->second;
    const FormulaNode& n = t_->node(f);
    FormulaId out;
    switch (n.kind) {
      case Kind::All: out = t_->atom(pseudo_name(index_.at(f))); break;
      case Kind::Atom:
      case Kind::True: out = f; break;
      case Kind::Neg: out = t_->neg(reduce(n.a)); break;
      case Kind::Next: out = t_->next(reduce(n.a)); break;
      case Kind::And: out = t_->conj(reduce(n.a), reduce(n.b)); break;
      case Kind::Until: out = t_->until(reduce(n.a), reduce(n.b)); break;
      default: throw std::logic_error("reduce: unknown kind");
    }
    red_.emplace(f, out);
    return out;
  }

 private:
  FormulaTable* t_;
  std::vector<FormulaId> entries_;
  std::unordered_map<FormulaId, std::size_t> index_;
  std::unordered_set<FormulaId> seen_;
  std::unordered_map<FormulaId, FormulaId> red_;
};

}  // namespace detail

}  // namespace ctlstar
