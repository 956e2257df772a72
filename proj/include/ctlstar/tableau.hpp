#pragma once
// tableau.hpp — the tableau kernel: the (T, s, η, π) structure, the rule set
// that grows it, the support predicate, and the three admissibility checks
// (direct contradictions, the nominated-thread property, and the loop
// check LG).
//
// A tableau is a tree of nodes plus up-links.  Each node carries an ordered
// list of phues (member sets over the closure of the root formula), a
// per-slot successor map, and per-edge predecessor maps π telling which
// source phue each target phue continues.  Rules add formulas, phues, nodes
// and π entries; LOOP replaces one freshly grown edge by an up-link.  Every
// mutation is reversible through an UndoToken with strict stack discipline.

#include <ctlstar/formula.hpp>
#include <ctlstar/hue.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ctlstar {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;
inline constexpr std::uint32_t kNoSlot = 0xffffffffu;

// ─────────────────────────────────────────────────────────────────────────────
// Node: one tableau node.  `label` is the pcolour (ordered phues), `succ` the
// per-slot successor map (kNoNode where absent), and `pi[i]` the predecessor
// map of the edge leaving slot i: pi[i][j] = which phue of this node the
// j-th phue of the target continues (kNoSlot while undecided).  `pi[i]` is
// empty exactly when slot i has no edge.
// ─────────────────────────────────────────────────────────────────────────────

struct Node {
  std::vector<MemberSet> label;
  std::vector<NodeId> succ;
  std::vector<std::vector<std::uint32_t>> pi;
  NodeId parent = kNoNode;  ///< tree parent (kNoNode for the root)
  std::uint32_t parent_slot = 0;
};

// ─────────────────────────────────────────────────────────────────────────────
// Rules
// ─────────────────────────────────────────────────────────────────────────────

enum class Rule : std::uint8_t {
  TwoNeg,  // kept for completeness; double negations collapse at parse time
  Conj,
  Dis1,
  Dis2,
  Nex,
  Nnx,
  Unt1,
  Unt2,
  Nun1,
  Nun2,
  Atm,
  Nat,
  Pos,
  Nec,
  Pred,
  Loop,
  NoLoop,
};

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::TwoNeg: return "2NEG";
    case Rule::Conj: return "CONJ";
    case Rule::Dis1: return "DIS1";
    case Rule::Dis2: return "DIS2";
    case Rule::Nex: return "NEX";
    case Rule::Nnx: return "NNX";
    case Rule::Unt1: return "UNT1";
    case Rule::Unt2: return "UNT2";
    case Rule::Nun1: return "NUN1";
    case Rule::Nun2: return "NUN2";
    case Rule::Atm: return "ATM";
    case Rule::Nat: return "NAT";
    case Rule::Pos: return "POS";
    case Rule::Nec: return "NEC";
    case Rule::Pred: return "PRED";
    case Rule::Loop: return "LOOP";
    case Rule::NoLoop: return "NOLOOP";
  }
  return "?";
}

/// One applicable rule occurrence.  Field use by rule:
///   local rules      node, slot, member (the formula being supported)
///   ATM/NAT          node, slot (source), member (atom), k (target slot)
///   POS              node, slot, member, k in 0..|label| (k=|label| appends)
///   PRED             node, slot (edge), member (target phue j), k in 0..|label|
///   NEX              member == kNoIndex means bare successor creation for a
///                    propositional slot-0 label (needed so leafless closure
///                    is reachable at all)
///   LOOP             node (the fresh leaf), k (target ancestor id)
///   NOLOOP           node (the fresh leaf)
struct RuleInstance {
  Rule rule{};
  NodeId node = kNoNode;
  std::uint32_t slot = 0;
  std::uint32_t member = static_cast<std::uint32_t>(kNoIndex);
  std::uint32_t k = 0;

  bool operator==(const RuleInstance&) const = default;
};

inline std::string render(const RuleInstance& r) {
  std::string out = rule_name(r.rule);
  out += " n" + std::to_string(r.node);
  out += "." + std::to_string(r.slot);
  if (r.member != static_cast<std::uint32_t>(kNoIndex))
    out += " m" + std::to_string(r.member);
  if (r.rule == Rule::Pos || r.rule == Rule::Pred || r.rule == Rule::Atm ||
      r.rule == Rule::Nat || r.rule == Rule::Loop)
    out += " k" + std::to_string(r.k);
  return out;
}

struct CheckReport {
  bool passed = true;
  std::string reason;  ///< which check failed, where (empty on pass)

  static CheckReport pass() { return {true, {}}; }
  static CheckReport fail(std::string why) { return {false, std::move(why)}; }
};

// ─────────────────────────────────────────────────────────────────────────────
// UndoToken: reversal record for exactly one apply().  Tokens must be undone
// in reverse order of issue (stack discipline); out-of-order undo throws.
// ─────────────────────────────────────────────────────────────────────────────

namespace detail {

struct Prim {
  enum class Op : std::uint8_t {
    AddMember,   // node/slot/member
    AppendPhue,  // node (phue itself recorded implicitly: it is the last)
    GrowPiTail,  // node/slot: pi[slot] gained one trailing kNoSlot
    CreateNode,  // the last node was created
    SetEdge,     // node/slot gained an edge (previously none)
    SetPi,       // node/slot/j: pi entry went kNoSlot -> k
    Retarget,    // node/slot: edge moved to `target`; old target/pi stored
    DeleteLast,  // the last node was deleted; snapshot stored
    Decline,     // node entered the loop-declined set
  };
  Op op{};
  NodeId node = kNoNode;
  std::uint32_t slot = 0;
  std::uint32_t j = 0;
  NodeId old_target = kNoNode;
  std::vector<std::uint32_t> old_pi;
  Node snapshot;
};

}  // namespace detail

class UndoToken {
 public:
  UndoToken() = default;
  UndoToken(UndoToken&&) = default;
  UndoToken& operator=(UndoToken&&) = default;

 private:
  friend class Tableau;
  std::uint64_t seq = 0;
  std::vector<detail::Prim> ops;
};

// ─────────────────────────────────────────────────────────────────────────────
// Tableau
// ─────────────────────────────────────────────────────────────────────────────

class Tableau {
 public:
  /// Fresh tableau: a single root node labelled with one phue {f}.
  Tableau(FormulaTable& t, FormulaId f) : table_(&t), cl_(t, f) {
    Node root;
    root.label.push_back(cl_.empty_set());
    root.label[0].set(cl_.root_index());
    root.succ.push_back(kNoNode);
    root.pi.emplace_back();
    nodes_.push_back(std::move(root));
  }

  /// Unchecked assembly from prepared nodes (test figures, deserializers).
  static Tableau from_parts(FormulaTable& t, FormulaId f,
                            std::vector<Node> nodes) {
    Tableau tb(t, f);
    tb.nodes_ = std::move(nodes);
    return tb;
  }

  FormulaTable& table() const { return *table_; }
  const ClosureSet& closure() const { return cl_; }
  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }
  const Node& node(NodeId t) const { return nodes_.at(t); }

  // ── support ────────────────────────────────────────────────────────────────

  /// Is the member locally justified at (t, slot) per the case table?
  bool is_supported(NodeId t, std::uint32_t slot, std::size_t m) const {
    const Node& n = nodes_[t];
    const MemberSet& phue = n.label[slot];
    auto linked_all = [&](std::size_t needed) {
      // every phue that π-continues `slot` through any edge must hold `needed`
      for (std::uint32_t i = 0; i < n.succ.size(); ++i) {
        if (n.succ[i] == kNoNode) continue;
        const Node& u = nodes_[n.succ[i]];
        for (std::uint32_t j = 0; j < n.pi[i].size(); ++j)
          if (n.pi[i][j] == slot && !u.label[j].test(needed)) return false;
      }
      return true;
    };
    switch (cl_.form(m)) {
      case MemberForm::FTrue: return true;
      case MemberForm::FFalse: return false;
      case MemberForm::FAtom:
      case MemberForm::FNegAtom:
        return slot == 0 || n.label[0].test(m);
      case MemberForm::FAnd:
        return phue.test(cl_.op0(m)) && phue.test(cl_.op1(m));
      case MemberForm::FNegAnd:
        return phue.test(cl_.negation_of(cl_.op0(m))) ||
               phue.test(cl_.negation_of(cl_.op1(m)));
      case MemberForm::FNext:
        return n.succ[slot] != kNoNode && linked_all(cl_.op0(m));
      case MemberForm::FNegNext:
        return n.succ[slot] != kNoNode &&
               linked_all(cl_.negation_of(cl_.op0(m)));
      case MemberForm::FUntil:
        if (phue.test(cl_.op1(m))) return true;
        return phue.test(cl_.op0(m)) && n.succ[slot] != kNoNode &&
               linked_all(m);
      case MemberForm::FNegUntil:
        if (!phue.test(cl_.negation_of(cl_.op1(m)))) return false;
        if (phue.test(cl_.negation_of(cl_.op0(m)))) return true;
        return n.succ[slot] != kNoNode && linked_all(m);
      case MemberForm::FAll:
        for (const MemberSet& p : n.label)
          if (!p.test(cl_.op0(m))) return false;
        return true;
      case MemberForm::FNegAll:
        for (const MemberSet& p : n.label)
          if (p.test(cl_.negation_of(cl_.op0(m)))) return true;
        return false;
    }
    return false;
  }

  // ── choice enumeration ─────────────────────────────────────────────────────

  /// Every rule instance whose precondition currently holds, in canonical
  /// order (node, slot, member ascending; variants of one locus adjacent).
  std::vector<RuleInstance> enumerate_choices() const {
    std::vector<RuleInstance> out;
    auto u32 = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
    for (NodeId t = 0; t < nodes_.size(); ++t) {
      const Node& n = nodes_[t];
      for (std::uint32_t i = 0; i < n.label.size(); ++i) {
        for (std::size_t m = n.label[i].find_first(); m != MemberSet::npos;
             m = n.label[i].find_next(m)) {
          if (is_supported(t, i, m)) continue;
          RuleInstance r{Rule::Conj, t, i, u32(m), 0};
          switch (cl_.form(m)) {
            case MemberForm::FAnd:
              out.push_back(r);
              break;
            case MemberForm::FNegAnd:
              r.rule = Rule::Dis1;
              out.push_back(r);
              r.rule = Rule::Dis2;
              out.push_back(r);
              break;
            case MemberForm::FNext:
              r.rule = Rule::Nex;
              out.push_back(r);
              break;
            case MemberForm::FNegNext:
              r.rule = Rule::Nnx;
              out.push_back(r);
              break;
            case MemberForm::FUntil:
              r.rule = Rule::Unt1;
              out.push_back(r);
              r.rule = Rule::Unt2;
              out.push_back(r);
              break;
            case MemberForm::FNegUntil:
              r.rule = Rule::Nun1;
              out.push_back(r);
              r.rule = Rule::Nun2;
              out.push_back(r);
              break;
            case MemberForm::FAll:
              r.rule = Rule::Nec;
              out.push_back(r);
              break;
            case MemberForm::FNegAll:
              r.rule = Rule::Pos;
              for (std::uint32_t k = 0; k <= n.label.size(); ++k) {
                r.k = k;
                out.push_back(r);
              }
              break;
            default:
              break;  // atoms are handled by the propagation pass below
          }
        }
      }
      // ATM/NAT: an atom literal decided anywhere at the node spreads to
      // every phue lacking it (one instance per target, smallest source).
      for (std::size_t a : cl_.atom_members()) {
        for (std::size_t m : {a, cl_.negation_of(a)}) {
          std::uint32_t src = kNoSlot;
          for (std::uint32_t i = 0; i < n.label.size() && src == kNoSlot; ++i)
            if (n.label[i].test(m)) src = i;
          if (src == kNoSlot) continue;
          Rule rule = cl_.form(m) == MemberForm::FAtom ? Rule::Atm : Rule::Nat;
          for (std::uint32_t k = 0; k < n.label.size(); ++k)
            if (!n.label[k].test(m))
              out.push_back({rule, t, src, u32(m), k});
        }
      }
      // PRED: undecided π entries on existing edges
      for (std::uint32_t i = 0; i < n.succ.size(); ++i) {
        if (n.succ[i] == kNoNode) continue;
        for (std::uint32_t j = 0; j < n.pi[i].size(); ++j) {
          if (n.pi[i][j] != kNoSlot) continue;
          for (std::uint32_t k = 0; k <= n.label.size(); ++k)
            out.push_back({Rule::Pred, t, i, j, k});
        }
      }
      // bare successor creation for a leaf whose slot-0 members will never
      // request an edge themselves (finishing still forbids leaves)
      if (!has_edge(t) && !slot0_expects_edge(t))
        out.push_back({Rule::Nex, t, 0, u32(kNoIndex), 0});
    }
    // LOOP / NOLOOP for the newest node while it is still a fresh leaf
    NodeId u = static_cast<NodeId>(nodes_.size() - 1);
    if (loop_candidate(u)) {
      bool any = false;
      NodeId parent = nodes_[u].parent;
      for (NodeId t = parent; t != kNoNode; t = nodes_[t].parent) {
        if (loop_target_ok(u, t)) {
          out.push_back({Rule::Loop, u, 0, u32(kNoIndex), t});
          any = true;
        }
      }
      if (any) out.push_back({Rule::NoLoop, u, 0, u32(kNoIndex), 0});
    }
    return out;
  }

  // ── apply / undo ───────────────────────────────────────────────────────────

  UndoToken apply(const RuleInstance& r) {
    UndoToken tok;
    switch (r.rule) {
      case Rule::TwoNeg:
        // double negations are collapsed structurally, so the precondition
        // (a ¬¬-member in a label) can never hold
        throw std::logic_error("apply: 2NEG has no applicable instance");
      case Rule::Conj: {
        require_unsupported(r, MemberForm::FAnd);
        add_member(tok, r.node, r.slot, cl_.op0(r.member));
        add_member(tok, r.node, r.slot, cl_.op1(r.member));
        break;
      }
      case Rule::Dis1:
      case Rule::Dis2: {
        require_unsupported(r, MemberForm::FNegAnd);
        std::size_t op = r.rule == Rule::Dis1 ? cl_.op0(r.member)
                                              : cl_.op1(r.member);
        add_member(tok, r.node, r.slot, cl_.negation_of(op));
        break;
      }
      case Rule::Nex: {
        if (r.member == static_cast<std::uint32_t>(kNoIndex)) {
          // bare creation for a propositional label
          require(r.node < nodes_.size() && r.slot == 0, r, "stale locus");
          require(!has_edge(r.node), r, "node already has an edge");
          require(!slot0_expects_edge(r.node), r,
                  "a slot-0 member will request the edge itself");
          ensure_successor(tok, r.node, 0);
          break;
        }
        require_unsupported(r, MemberForm::FNext);
        ensure_successor(tok, r.node, r.slot);
        propagate_linked(tok, r.node, r.slot, cl_.op0(r.member));
        break;
      }
      case Rule::Nnx: {
        require_unsupported(r, MemberForm::FNegNext);
        ensure_successor(tok, r.node, r.slot);
        propagate_linked(tok, r.node, r.slot,
                         cl_.negation_of(cl_.op0(r.member)));
        break;
      }
      case Rule::Unt1: {
        require_unsupported(r, MemberForm::FUntil);
        add_member(tok, r.node, r.slot, cl_.op1(r.member));
        break;
      }
      case Rule::Unt2: {
        require_unsupported(r, MemberForm::FUntil);
        add_member(tok, r.node, r.slot, cl_.op0(r.member));
        ensure_successor(tok, r.node, r.slot);
        propagate_linked(tok, r.node, r.slot, r.member);
        break;
      }
      case Rule::Nun1: {
        require_unsupported(r, MemberForm::FNegUntil);
        add_member(tok, r.node, r.slot, cl_.negation_of(cl_.op1(r.member)));
        add_member(tok, r.node, r.slot, cl_.negation_of(cl_.op0(r.member)));
        break;
      }
      case Rule::Nun2: {
        require_unsupported(r, MemberForm::FNegUntil);
        add_member(tok, r.node, r.slot, cl_.negation_of(cl_.op1(r.member)));
        ensure_successor(tok, r.node, r.slot);
        propagate_linked(tok, r.node, r.slot, r.member);
        break;
      }
      case Rule::Atm:
      case Rule::Nat: {
        require(r.node < nodes_.size(), r, "stale locus");
        Node& n = nodes_[r.node];
        require(r.slot < n.label.size() && r.k < n.label.size(), r,
                "stale locus");
        require(n.label[r.slot].test(r.member), r, "member absent at source");
        require(!n.label[r.k].test(r.member), r, "member already at target");
        add_member(tok, r.node, r.k, r.member);
        break;
      }
      case Rule::Pos: {
        require_unsupported(r, MemberForm::FNegAll);
        std::size_t body = cl_.negation_of(cl_.op0(r.member));
        Node& n = nodes_[r.node];
        require(r.k <= n.label.size(), r, "phue index out of range");
        if (r.k < n.label.size()) {
          add_member(tok, r.node, r.k, body);
        } else {
          MemberSet fresh = cl_.empty_set();
          fresh.set(body);
          append_phue(tok, r.node, fresh);
        }
        break;
      }
      case Rule::Nec: {
        require_unsupported(r, MemberForm::FAll);
        for (std::uint32_t k = 0; k < nodes_[r.node].label.size(); ++k)
          if (!nodes_[r.node].label[k].test(cl_.op0(r.member)))
            add_member(tok, r.node, k, cl_.op0(r.member));
        break;
      }
      case Rule::Pred: {
        require(r.node < nodes_.size(), r, "stale locus");
        Node& n = nodes_[r.node];
        require(r.slot < n.succ.size() && n.succ[r.slot] != kNoNode, r,
                "no edge at slot");
        require(r.member < n.pi[r.slot].size(), r, "phue index out of range");
        require(n.pi[r.slot][r.member] == kNoSlot, r, "entry already decided");
        require(r.k <= n.label.size(), r, "predecessor out of range");
        if (r.k == n.label.size()) append_phue(tok, r.node, cl_.empty_set());
        set_pi(tok, r.node, r.slot, r.member, r.k);
        break;
      }
      case Rule::Loop: {
        require(loop_candidate(r.node), r, "node is not a fresh leaf");
        require(loop_target_ok(r.node, r.k), r, "target not admissible");
        Node& leaf = nodes_[r.node];
        NodeId parent = leaf.parent;
        std::uint32_t ps = leaf.parent_slot;
        detail::Prim p;
        p.op = detail::Prim::Op::Retarget;
        p.node = parent;
        p.slot = ps;
        p.old_target = nodes_[parent].succ[ps];
        p.old_pi = nodes_[parent].pi[ps];
        nodes_[parent].succ[ps] = r.k;
        nodes_[parent].pi[ps].assign(nodes_[r.k].label.size(), kNoSlot);
        nodes_[parent].pi[ps][0] = ps;
        tok.ops.push_back(std::move(p));
        detail::Prim d;
        d.op = detail::Prim::Op::DeleteLast;
        d.snapshot = std::move(nodes_.back());
        nodes_.pop_back();
        tok.ops.push_back(std::move(d));
        break;
      }
      case Rule::NoLoop: {
        require(r.node < nodes_.size() && !declined_.count(r.node), r,
                "already declined");
        declined_.insert(r.node);
        detail::Prim p;
        p.op = detail::Prim::Op::Decline;
        p.node = r.node;
        tok.ops.push_back(std::move(p));
        break;
      }
    }
    tok.seq = ++epoch_;
    return tok;
  }

  void undo(UndoToken& tok) {
    if (tok.seq != epoch_)
      throw std::logic_error("undo: out-of-order token");
    for (auto it = tok.ops.rbegin(); it != tok.ops.rend(); ++it) {
      detail::Prim& p = *it;
      using Op = detail::Prim::Op;
      switch (p.op) {
        case Op::AddMember:
          nodes_[p.node].label[p.slot].reset(p.j);
          break;
        case Op::AppendPhue:
          nodes_[p.node].label.pop_back();
          nodes_[p.node].succ.pop_back();
          nodes_[p.node].pi.pop_back();
          break;
        case Op::GrowPiTail:
          nodes_[p.node].pi[p.slot].pop_back();
          break;
        case Op::CreateNode:
          nodes_.pop_back();
          break;
        case Op::SetEdge:
          nodes_[p.node].succ[p.slot] = kNoNode;
          nodes_[p.node].pi[p.slot].clear();
          break;
        case Op::SetPi:
          nodes_[p.node].pi[p.slot][p.j] = kNoSlot;
          break;
        case Op::Retarget:
          nodes_[p.node].succ[p.slot] = p.old_target;
          nodes_[p.node].pi[p.slot] = std::move(p.old_pi);
          break;
        case Op::DeleteLast:
          nodes_.push_back(std::move(p.snapshot));
          break;
        case Op::Decline:
          declined_.erase(p.node);
          break;
      }
    }
    tok.ops.clear();
    --epoch_;
  }

  // ── checks ─────────────────────────────────────────────────────────────────

  /// Fails on a member together with its negation in one phue, on the false
  /// constant, or on an atom decided both ways across phues of one node.
  CheckReport check_contradiction() const {
    for (NodeId t = 0; t < nodes_.size(); ++t) {
      const Node& n = nodes_[t];
      for (std::uint32_t i = 0; i < n.label.size(); ++i) {
        for (std::size_t m = n.label[i].find_first(); m != MemberSet::npos;
             m = n.label[i].find_next(m)) {
          if (cl_.form(m) == MemberForm::FFalse)
            return CheckReport::fail("false constant in n" +
                                     std::to_string(t) + "." +
                                     std::to_string(i));
          std::size_t neg = cl_.negation_of(m);
          if (neg > m && n.label[i].test(neg))
            return CheckReport::fail(
                "contradiction in n" + std::to_string(t) + "." +
                std::to_string(i) + ": " + cl_.render_member(m));
        }
      }
      for (std::size_t a : cl_.atom_members()) {
        bool pos = false, negd = false;
        for (const MemberSet& p : n.label) {
          pos = pos || p.test(a);
          negd = negd || p.test(cl_.negation_of(a));
        }
        if (pos && negd)
          return CheckReport::fail("atom decided both ways at n" +
                                   std::to_string(t) + ": " +
                                   cl_.render_member(a));
      }
    }
    return CheckReport::pass();
  }

  /// Nominated thread property: around every cycle closed by a slot-0
  /// up-link, the slot-0 phues must witness all their eventualities.
  CheckReport check_ntp() const {
    for (NodeId t = 0; t < nodes_.size(); ++t) {
      const Node& n = nodes_[t];
      if (n.succ.empty() || n.succ[0] == kNoNode) continue;
      if (!is_ancestor(n.succ[0], t)) continue;
      // follow 0-successors from the target; if they return to t the
      // nominated thread is the resulting cycle, otherwise nothing to check
      std::vector<NodeId> cyc;
      std::set<NodeId> seen;
      NodeId c = n.succ[0];
      bool closed_cycle = false;
      while (seen.insert(c).second) {
        cyc.push_back(c);
        if (c == t) {
          closed_cycle = true;
          break;
        }
        const Node& cn = nodes_[c];
        if (cn.succ.empty() || cn.succ[0] == kNoNode) break;
        c = cn.succ[0];
      }
      if (!closed_cycle) continue;
      for (NodeId cnode : cyc) {
        const MemberSet& ph = nodes_[cnode].label[0];
        for (std::size_t m = ph.find_first(); m != MemberSet::npos;
             m = ph.find_next(m)) {
          if (cl_.form(m) != MemberForm::FUntil) continue;
          bool witnessed = false;
          for (NodeId w : cyc)
            if (nodes_[w].label[0].test(cl_.op1(m))) {
              witnessed = true;
              break;
            }
          if (!witnessed)
            return CheckReport::fail("unwitnessed eventuality on loop at n" +
                                     std::to_string(t) + ": " +
                                     cl_.render_member(m));
        }
      }
    }
    return CheckReport::pass();
  }

  CheckReport check_lg(std::size_t pair_cap = kDefaultHuePairCap) const;

  // ── finished shape ─────────────────────────────────────────────────────────

  bool has_leaves() const {
    for (NodeId t = 0; t < nodes_.size(); ++t)
      if (!has_edge(t)) return true;
    return false;
  }

  bool pi_complete() const {
    for (const Node& n : nodes_)
      for (std::uint32_t i = 0; i < n.succ.size(); ++i) {
        if (n.succ[i] == kNoNode) continue;
        for (std::uint32_t v : n.pi[i])
          if (v == kNoSlot) return false;
      }
    return true;
  }

  bool all_supported() const {
    for (NodeId t = 0; t < nodes_.size(); ++t) {
      const Node& n = nodes_[t];
      for (std::uint32_t i = 0; i < n.label.size(); ++i)
        for (std::size_t m = n.label[i].find_first(); m != MemberSet::npos;
             m = n.label[i].find_next(m))
          if (!is_supported(t, i, m)) return false;
    }
    return true;
  }

  /// No leaves, π total, every formula supported, and all three checks pass.
  /// Propagates ResourceError when the closure exceeds the hue cap.
  bool is_finished(std::size_t pair_cap = kDefaultHuePairCap) const {
    return !has_leaves() && pi_complete() && all_supported() &&
           check_contradiction().passed && check_ntp().passed &&
           check_lg(pair_cap).passed;
  }

  // ── serialization ──────────────────────────────────────────────────────────

  /// Canonical text form; byte-identical iff the tableaux are identical.
  std::string serialize() const {
    std::string out;
    for (NodeId t = 0; t < nodes_.size(); ++t) {
      const Node& n = nodes_[t];
      out += "n" + std::to_string(t);
      if (n.parent == kNoNode)
        out += " root";
      else
        out += " p=" + std::to_string(n.parent) + "." +
               std::to_string(n.parent_slot);
      for (std::uint32_t i = 0; i < n.label.size(); ++i) {
        out += " | " + std::to_string(i) + ":{";
        bool first = true;
        for (std::size_t m = n.label[i].find_first(); m != MemberSet::npos;
             m = n.label[i].find_next(m)) {
          if (!first) out += ",";
          out += std::to_string(m);
          first = false;
        }
        out += "}";
        if (n.succ[i] != kNoNode) {
          out += "->n" + std::to_string(n.succ[i]) + " pi=[";
          for (std::uint32_t j = 0; j < n.pi[i].size(); ++j) {
            if (j) out += ",";
            out += n.pi[i][j] == kNoSlot ? "-" : std::to_string(n.pi[i][j]);
          }
          out += "]";
        }
      }
      out += "\n";
    }
    out += "declined:";
    for (NodeId d : declined_) out += " n" + std::to_string(d);
    out += "\n";
    return out;
  }

 private:
  // ── structural helpers ─────────────────────────────────────────────────────

  bool has_edge(NodeId t) const {
    for (NodeId u : nodes_[t].succ)
      if (u != kNoNode) return true;
    return false;
  }

  /// Will some rule for a slot-0 member create or demand the edge itself?
  /// Next-steps always do; until-forms only while not yet supported in place.
  bool slot0_expects_edge(NodeId t) const {
    const MemberSet& phue = nodes_[t].label[0];
    for (std::size_t m = phue.find_first(); m != MemberSet::npos;
         m = phue.find_next(m))
      switch (cl_.form(m)) {
        case MemberForm::FNext:
        case MemberForm::FNegNext: return true;
        case MemberForm::FUntil:
        case MemberForm::FNegUntil:
          if (!is_supported(t, 0, m)) return true;
          break;
        default: break;
      }
    return false;
  }

  /// Is `a` on the tree-ancestor chain of `t` (inclusive of t itself)?
  bool is_ancestor(NodeId a, NodeId t) const {
    for (NodeId c = t; c != kNoNode; c = nodes_[c].parent)
      if (c == a) return true;
    return false;
  }

  /// Fresh leaf eligible for LOOP: the newest node, non-root, no edges, all
  /// label content in slot 0, and not already declined.
  bool loop_candidate(NodeId u) const {
    if (u + 1 != nodes_.size() || u == 0) return false;
    if (declined_.count(u)) return false;
    const Node& n = nodes_[u];
    if (n.parent == kNoNode || has_edge(u)) return false;
    for (std::uint32_t i = 1; i < n.label.size(); ++i)
      if (n.label[i].any()) return false;
    return true;
  }

  /// May the edge above `u` be replaced by an up-link to `t`?
  bool loop_target_ok(NodeId u, NodeId t) const {
    if (t >= nodes_.size() || u >= nodes_.size()) return false;
    const Node& leaf = nodes_[u];
    if (leaf.parent == kNoNode || !is_ancestor(t, leaf.parent)) return false;
    if (!leaf.label[0].is_subset_of(nodes_[t].label[0])) return false;
    // one edge per (source, target) pair keeps π unambiguous
    for (NodeId v : nodes_[leaf.parent].succ)
      if (v == t) return false;
    return true;
  }

  // ── recorded primitive mutations ───────────────────────────────────────────

  void require(bool ok, const RuleInstance& r, const char* why) {
    if (!ok)
      throw std::logic_error(std::string("apply ") + render(r) + ": " + why);
  }

  void require_unsupported(const RuleInstance& r, MemberForm expect) {
    require(r.node < nodes_.size(), r, "stale locus");
    const Node& n = nodes_[r.node];
    require(r.slot < n.label.size(), r, "stale locus");
    require(r.member < cl_.size() && n.label[r.slot].test(r.member), r,
            "member absent");
    require(cl_.form(r.member) == expect, r, "wrong member form");
    require(!is_supported(r.node, r.slot, r.member), r, "already supported");
  }

  void add_member(UndoToken& tok, NodeId t, std::uint32_t slot,
                  std::size_t m) {
    if (nodes_[t].label[slot].test(m)) return;
    nodes_[t].label[slot].set(m);
    detail::Prim p;
    p.op = detail::Prim::Op::AddMember;
    p.node = t;
    p.slot = slot;
    p.j = static_cast<std::uint32_t>(m);
    tok.ops.push_back(std::move(p));
  }

  void append_phue(UndoToken& tok, NodeId t, MemberSet content) {
    nodes_[t].label.push_back(std::move(content));
    nodes_[t].succ.push_back(kNoNode);
    nodes_[t].pi.emplace_back();
    detail::Prim p;
    p.op = detail::Prim::Op::AppendPhue;
    p.node = t;
    tok.ops.push_back(std::move(p));
    // every edge into t now has one more π entry to decide
    for (NodeId v = 0; v < nodes_.size(); ++v)
      for (std::uint32_t i = 0; i < nodes_[v].succ.size(); ++i)
        if (nodes_[v].succ[i] == t) {
          nodes_[v].pi[i].push_back(kNoSlot);
          detail::Prim g;
          g.op = detail::Prim::Op::GrowPiTail;
          g.node = v;
          g.slot = i;
          tok.ops.push_back(std::move(g));
        }
  }

  void ensure_successor(UndoToken& tok, NodeId t, std::uint32_t slot) {
    if (nodes_[t].succ[slot] != kNoNode) return;
    Node fresh;
    fresh.label.push_back(cl_.empty_set());
    fresh.succ.push_back(kNoNode);
    fresh.pi.emplace_back();
    fresh.parent = t;
    fresh.parent_slot = slot;
    NodeId id = static_cast<NodeId>(nodes_.size());
    nodes_.push_back(std::move(fresh));
    detail::Prim c;
    c.op = detail::Prim::Op::CreateNode;
    tok.ops.push_back(std::move(c));
    nodes_[t].succ[slot] = id;
    nodes_[t].pi[slot].assign(1, kNoSlot);
    nodes_[t].pi[slot][0] = slot;
    detail::Prim e;
    e.op = detail::Prim::Op::SetEdge;
    e.node = t;
    e.slot = slot;
    tok.ops.push_back(std::move(e));
  }

  void propagate_linked(UndoToken& tok, NodeId t, std::uint32_t phue_slot,
                        std::size_t member) {
    const Node& n = nodes_[t];
    for (std::uint32_t i = 0; i < n.succ.size(); ++i) {
      if (n.succ[i] == kNoNode) continue;
      NodeId u = n.succ[i];
      for (std::uint32_t j = 0; j < n.pi[i].size(); ++j)
        if (n.pi[i][j] == phue_slot) add_member(tok, u, j, member);
    }
  }

  void set_pi(UndoToken& tok, NodeId t, std::uint32_t slot, std::uint32_t j,
              std::uint32_t k) {
    nodes_[t].pi[slot][j] = k;
    detail::Prim p;
    p.op = detail::Prim::Op::SetPi;
    p.node = t;
    p.slot = slot;
    p.j = j;
    tok.ops.push_back(std::move(p));
  }

  // ── realizability cache ────────────────────────────────────────────────────
  // Everything below depends only on the closure and the cap, never on the
  // mutable node array, so it is computed once and shared across snapshots.

  struct LgCache {
    struct StratumAtom {
      std::size_t member;     ///< atom member index in scl
      long inner;             ///< stratum index for pseudo-atoms, -1 otherwise
      std::size_t root_atom;  ///< matching atom member of the root closure
    };
    struct Stratum {
      ClosureSet scl;
      std::vector<MemberSet> hues;
      std::vector<StratumAtom> atoms;
      /// per hue: the (pseudo-)literal members its path claims actually lean
      /// on (until witnesses, H3-forced invariants, "now" parts, the root);
      /// other literal claims are incidental MPC fillers and stay free
      std::vector<MemberSet> consumed;
      std::vector<char> junk;  ///< hues no definite path may use at all
    };
    std::size_t pair_cap = 0;
    std::unique_ptr<detail::AllpathsRegistry> reg;
    std::vector<MemberSet> hues;       ///< hues of the root closure
    std::vector<MemberSet> hues_with;  ///< member -> set of hues containing it
    /// hues sharing one r_X requirement pattern share their whole predecessor
    /// row, so rows are stored once per profile instead of once per hue
    std::vector<std::uint32_t> pred_prof;  ///< hue -> predecessor row profile
    std::vector<MemberSet> prof_pred;      ///< profile -> r_X-predecessor hues
    /// r_A partitions hues by their atom + A-member projection; storing the
    /// partition instead of per-hue companion sets keeps the witness pass
    /// linear in the class count rather than the hue count
    std::vector<std::uint32_t> ra_class;  ///< hue -> its r_A class
    std::vector<MemberSet> ra_members;    ///< r_A class -> hues in the class
    /// the ¬A-witness fixpoint is node-local, so its result is memoised per
    /// seed mask; the same few decided-atom patterns recur across checks
    std::map<MemberSet, MemberSet> nawit_fix;
    std::vector<std::size_t> fall, fall_reg;       // A-members + registry slot
    std::vector<std::size_t> fnegall, fnegall_want;  // ¬A-members + witness
    std::vector<std::size_t> funtil, funtil_beta;    // untils + their goal
    std::vector<Stratum> strata;
  };

  void ensure_lg_cache(std::size_t pair_cap) const;

  FormulaTable* table_;
  ClosureSet cl_;
  std::vector<Node> nodes_;
  std::set<NodeId> declined_;
  std::uint64_t epoch_ = 0;
  mutable std::shared_ptr<LgCache> lgc_;
};

// ─────────────────────────────────────────────────────────────────────────────
// LG: greatest-fixpoint pruning of (node, hue) pairs.
//
// The check treats the tableau built so far as a partial transition structure
// (nodes, all successor edges, atoms decided by the labels).  A hue is
// admissible at a node when its atoms agree with the decided atoms (undecided
// atoms are free) and none of its A-members is already refuted — an A-member
// is refuted at a node when a definite infinite path through existing edges
// satisfies the negated body (computed per A-subformula, innermost first,
// with inner path quantifiers reduced to pseudo-atom labels).  Admissible
// pairs are then pruned: a pair at a node with successors needs a surviving
// r_X-successor pair; a ¬A-member needs a surviving r_A-witness at the same
// node; and in regions whose whole reachable future is closed (every phue
// slot has an edge) a pending eventuality must be able to reach a witness.
// The tableau fails when a phue of a closed node embeds in no surviving hue,
// or — once no leaves remain — when the root's slot-0 phue embeds in no
// surviving root hue.
// ─────────────────────────────────────────────────────────────────────────────

inline void Tableau::ensure_lg_cache(std::size_t pair_cap) const {
  if (lgc_ && lgc_->pair_cap == pair_cap) return;
  auto c = std::make_shared<LgCache>();
  c->pair_cap = pair_cap;
  c->reg = std::make_unique<detail::AllpathsRegistry>(*table_);
  c->reg->collect(cl_.root_formula());
  c->hues = enumerate_hues(cl_, pair_cap);
  const std::size_t H = c->hues.size();

  c->hues_with.assign(cl_.size(), MemberSet(H));
  for (std::size_t h = 0; h < H; ++h)
    for (std::size_t m = c->hues[h].find_first(); m != MemberSet::npos;
         m = c->hues[h].find_next(m))
      c->hues_with[m].set(h);

  std::vector<MemberSet> xreq(H, cl_.empty_set());
  for (std::size_t h = 0; h < H; ++h)
    xreq[h] = rx_requirements(cl_, c->hues[h]);
  std::map<MemberSet, std::uint32_t> reqids;
  std::vector<std::uint32_t> reqof(H);
  for (std::size_t h = 0; h < H; ++h)
    reqof[h] = reqids.emplace(xreq[h], std::uint32_t(reqids.size()))
                   .first->second;
  const std::size_t R = reqids.size();
  std::vector<const MemberSet*> reqset(R);
  for (const auto& [req, id] : reqids) reqset[id] = &req;
  std::map<MemberSet, std::uint32_t> profids;
  c->pred_prof.resize(H);
  for (std::size_t h = 0; h < H; ++h) {
    MemberSet cov(R);
    for (std::size_t r = 0; r < R; ++r)
      if (reqset[r]->is_subset_of(c->hues[h])) cov.set(r);
    c->pred_prof[h] =
        profids.emplace(std::move(cov), std::uint32_t(profids.size()))
            .first->second;
  }
  c->prof_pred.assign(profids.size(), MemberSet(H));
  for (const auto& [cov, p] : profids)
    for (std::size_t h = 0; h < H; ++h)
      if (cov.test(reqof[h])) c->prof_pred[p].set(h);

  MemberSet raproj = cl_.empty_set();
  for (std::size_t m = 0; m < cl_.size(); ++m)
    if (cl_.form(m) == MemberForm::FAtom || cl_.form(m) == MemberForm::FAll)
      raproj.set(m);
  c->ra_class.resize(H);
  std::map<MemberSet, std::uint32_t> classes;
  for (std::size_t h = 0; h < H; ++h) {
    MemberSet p = c->hues[h];
    p &= raproj;
    c->ra_class[h] =
        classes.emplace(std::move(p), std::uint32_t(classes.size()))
            .first->second;
  }
  c->ra_members.assign(classes.size(), MemberSet(H));
  for (std::size_t h = 0; h < H; ++h) c->ra_members[c->ra_class[h]].set(h);

  for (std::size_t m = 0; m < cl_.size(); ++m)
    switch (cl_.form(m)) {
      case MemberForm::FAll:
        c->fall.push_back(m);
        c->fall_reg.push_back(c->reg->index_of(cl_.member(m)));
        break;
      case MemberForm::FNegAll:
        c->fnegall.push_back(m);
        c->fnegall_want.push_back(cl_.negation_of(cl_.op0(m)));
        break;
      case MemberForm::FUntil:
        c->funtil.push_back(m);
        c->funtil_beta.push_back(cl_.op1(m));
        break;
      default: break;
    }

  std::map<std::string, std::size_t> root_atom_by_name;
  for (std::size_t a : cl_.atom_members())
    root_atom_by_name[table_->atom_name(cl_.member(a))] = a;
  for (std::size_t k = 0; k < c->reg->size(); ++k) {
    FormulaId refutation = c->reg->reduce(table_->neg(c->reg->body(k)));
    c->strata.push_back(
        LgCache::Stratum{ClosureSet(*table_, refutation), {}, {}, {}, {}});
    LgCache::Stratum& st = c->strata.back();
    st.hues = enumerate_hues(st.scl, pair_cap);
    for (std::size_t a : st.scl.atom_members()) {
      std::string name = table_->atom_name(st.scl.member(a));
      if (name[0] == '@')
        st.atoms.push_back(
            {a, static_cast<long>(std::stoul(name.substr(1))), 0});
      else {
        auto it = root_atom_by_name.find(name);
        st.atoms.push_back({a, -1,
                            it == root_atom_by_name.end()
                                ? static_cast<std::size_t>(-1)
                                : it->second});
      }
    }
    // Which claims does a refuting path lean on?  Until witnesses, H3-forced
    // invariants, "now" parts, conjunction operands and the root are load-
    // bearing; X can consume a literal one step away, so closures with X
    // treat every present literal as load-bearing.
    auto literal = [&](std::size_t m) {
      MemberForm f = st.scl.form(m);
      return f == MemberForm::FAtom || f == MemberForm::FNegAtom;
    };
    bool blunt = false;
    for (std::size_t m = 0; m < st.scl.size(); ++m)
      switch (st.scl.form(m)) {
        case MemberForm::FNext:
        case MemberForm::FNegNext:
          blunt = true;
          break;
        default: break;
      }
    std::size_t root_m = st.scl.root_index();
    st.consumed.assign(st.hues.size(), st.scl.empty_set());
    st.junk.assign(st.hues.size(), 0);
    for (std::size_t h = 0; h < st.hues.size(); ++h) {
      MemberSet& cons = st.consumed[h];
      if (blunt) {
        for (std::size_t m = 0; m < st.scl.size(); ++m)
          if (literal(m) && st.hues[h].test(m)) cons.set(m);
      } else {
        for (std::size_t u = 0; u < st.scl.size(); ++u) {
          if (st.scl.form(u) == MemberForm::FUntil) {
            std::size_t beta = st.scl.op1(u);
            if (!st.hues[h].test(u)) {
              std::size_t nb = st.scl.negation_of(beta);
              if (literal(nb)) cons.set(nb);
            } else if (st.hues[h].test(beta)) {
              if (literal(beta)) cons.set(beta);
            } else if (literal(st.scl.op0(u))) {
              if (st.hues[h].test(st.scl.op0(u)))
                cons.set(st.scl.op0(u));
              else
                st.junk[h] = 1;  // pending until whose "now" part is absent
            }
          } else if (st.scl.form(u) == MemberForm::FAnd) {
            if (st.hues[h].test(u)) {
              if (literal(st.scl.op0(u))) cons.set(st.scl.op0(u));
              if (literal(st.scl.op1(u))) cons.set(st.scl.op1(u));
            } else {
              // one present negated operand carries ~(x & y); MPC gives a
              // hue for each way, so consuming all present ones stays exact
              for (std::size_t o : {st.scl.op0(u), st.scl.op1(u)}) {
                std::size_t no = st.scl.negation_of(o);
                if (literal(no) && st.hues[h].test(no)) cons.set(no);
              }
            }
          }
        }
      }
      if (literal(root_m) && st.hues[h].test(root_m)) cons.set(root_m);
    }
  }
  lgc_ = std::move(c);
}

inline CheckReport Tableau::check_lg(std::size_t pair_cap) const {
  ensure_lg_cache(pair_cap);
  const LgCache& c = *lgc_;
  const std::size_t H = c.hues.size();
  const std::size_t nnodes = nodes_.size();
  std::vector<std::vector<std::size_t>> edges(nnodes);
  for (NodeId t = 0; t < nnodes; ++t)
    for (NodeId u : nodes_[t].succ)
      if (u != kNoNode) edges[t].push_back(u);

  // decided atoms per node, as root-closure member sets
  std::vector<MemberSet> decided_true(nnodes, cl_.empty_set());
  std::vector<MemberSet> decided_false(nnodes, cl_.empty_set());
  for (NodeId t = 0; t < nnodes; ++t)
    for (std::size_t a : cl_.atom_members())
      for (const MemberSet& p : nodes_[t].label) {
        if (p.test(a)) decided_true[t].set(a);
        if (p.test(cl_.negation_of(a))) decided_false[t].set(a);
      }

  // refutation labels for A-subformulas, innermost first: refuted[k][t] when
  // a definite refuting path from t already exists
  std::vector<std::vector<char>> refuted(c.strata.size(),
                                         std::vector<char>(nnodes, 0));
  for (std::size_t k = 0; k < c.strata.size(); ++k) {
    const LgCache::Stratum& st = c.strata[k];
    ProductSpec ps;
    ps.num_states = nnodes;
    ps.succ = edges;
    ps.dead_end_viable = false;  // only fully built paths refute definitely
    ps.admissible.resize(nnodes);
    for (std::size_t t = 0; t < nnodes; ++t)
      for (std::size_t h = 0; h < st.hues.size(); ++h) {
        if (st.junk[h]) continue;
        bool ok = true;
        for (const LgCache::StratumAtom& sa : st.atoms) {
          // Claims the path leans on must already be definite: a positive
          // inner A-label never is, a negative one needs the refutation, and
          // literals need the node's labels to decide them.  Incidental
          // claims stay free so the path tracks every later completion.
          if (st.hues[h].test(sa.member)) {
            if (!st.consumed[h].test(sa.member)) continue;
            if (sa.inner >= 0 ||
                sa.root_atom == static_cast<std::size_t>(-1) ||
                !decided_true[t].test(sa.root_atom))
              ok = false;
          } else {
            std::size_t nm = st.scl.negation_of(sa.member);
            if (!st.consumed[h].test(nm)) continue;
            if (sa.inner >= 0) {
              if (!refuted[sa.inner][t]) ok = false;
            } else if (sa.root_atom == static_cast<std::size_t>(-1) ||
                       !decided_false[t].test(sa.root_atom)) {
              ok = false;
            }
          }
          if (!ok) break;
        }
        if (ok) ps.admissible[t].push_back(h);
      }
    ViableProduct vp(st.scl, st.hues, std::move(ps));
    for (std::size_t t = 0; t < nnodes; ++t)
      for (std::size_t h = 0; h < st.hues.size(); ++h)
        if (st.hues[h].test(st.scl.root_index()) && vp.viable(t, h)) {
          refuted[k][t] = 1;
          break;
        }
  }

  // closed nodes and solid regions
  std::vector<char> closed(nnodes, 1), solid(nnodes, 1);
  for (NodeId t = 0; t < nnodes; ++t)
    for (NodeId u : nodes_[t].succ)
      if (u == kNoNode) closed[t] = 0;
  {
    // a node is solid unless it reaches a non-closed node
    std::vector<std::vector<std::size_t>> back(nnodes);
    for (std::size_t t = 0; t < nnodes; ++t)
      for (std::size_t u : edges[t]) back[u].push_back(t);
    std::vector<std::size_t> queue;
    for (std::size_t t = 0; t < nnodes; ++t)
      if (!closed[t]) {
        solid[t] = 0;
        queue.push_back(t);
      }
    for (std::size_t qi = 0; qi < queue.size(); ++qi)
      for (std::size_t v : back[queue[qi]])
        if (solid[v]) {
          solid[v] = 0;
          queue.push_back(v);
        }
  }
  std::vector<std::size_t> solid_nodes;
  for (std::size_t t = 0; t < nnodes; ++t)
    if (solid[t]) solid_nodes.push_back(t);

  // seed admissible pairs over the root closure; each seed is immediately
  // stabilised under the node-local ¬A-witness rule (memoised: the same few
  // decided patterns recur across checks of one search)
  auto nawit_stabilize = [&c](MemberSet s) {
    MemberSet cls(s.size()), need(s.size()), have(s.size());
    bool ch = true;
    while (ch) {
      ch = false;
      for (std::size_t k = 0; k < c.ra_members.size(); ++k) {
        cls = s;
        cls &= c.ra_members[k];
        if (!cls.any()) continue;
        for (std::size_t i = 0; i < c.fnegall.size(); ++i) {
          need = cls;
          need &= c.hues_with[c.fnegall[i]];
          if (!need.any()) continue;
          have = cls;
          have &= c.hues_with[c.fnegall_want[i]];
          if (have.any()) continue;
          s -= need;
          cls -= need;
          ch = true;
          if (!cls.any()) break;
        }
      }
    }
    return s;
  };
  std::vector<MemberSet> alive(nnodes, MemberSet(H));
  for (std::size_t t = 0; t < nnodes; ++t) {
    MemberSet mask(H);
    mask.set();
    for (std::size_t a = decided_true[t].find_first(); a != MemberSet::npos;
         a = decided_true[t].find_next(a))
      mask &= c.hues_with[a];
    for (std::size_t a = decided_false[t].find_first(); a != MemberSet::npos;
         a = decided_false[t].find_next(a))
      mask -= c.hues_with[a];
    for (std::size_t i = 0; i < c.fall.size(); ++i)
      if (refuted[c.fall_reg[i]][t]) mask -= c.hues_with[c.fall[i]];
    auto it = lgc_->nawit_fix.find(mask);
    if (it == lgc_->nawit_fix.end())
      it = lgc_->nawit_fix.emplace(mask, nawit_stabilize(mask)).first;
    alive[t] = it->second;
  }

  // back-edges and per-node step caches shared by the propagation passes;
  // "can_step[t]" is recomputed only when the successor union changes
  std::vector<std::vector<std::size_t>> back(nnodes);
  for (std::size_t t = 0; t < nnodes; ++t)
    for (std::size_t u : edges[t]) back[u].push_back(t);
  std::vector<MemberSet> uni_prev(nnodes, MemberSet(H));
  std::vector<MemberSet> can_step(nnodes, MemberSet(H));
  std::vector<char> can_valid(nnodes, 0);
  std::vector<MemberSet> reach(nnodes, MemberSet(H));
  std::vector<MemberSet> gain(nnodes, MemberSet(H));
  MemberSet uni(H), scratch(H), wit(H);

  // r_A classes present per node; alive sets only shrink within a call, so a
  // class found empty is dropped for good
  std::vector<std::vector<std::uint32_t>> live_classes(nnodes);
  {
    std::vector<char> seen(c.ra_members.size(), 0);
    for (std::size_t t = 0; t < nnodes; ++t) {
      for (std::size_t h = alive[t].find_first(); h != MemberSet::npos;
           h = alive[t].find_next(h))
        if (!seen[c.ra_class[h]]) {
          seen[c.ra_class[h]] = 1;
          live_classes[t].push_back(c.ra_class[h]);
        }
      for (std::uint32_t k : live_classes[t]) seen[k] = 0;
    }
  }

  // union of predecessor rows over a hue set, one OR per distinct profile
  std::vector<std::uint32_t> pstamp(c.prof_pred.size(), 0);
  std::uint32_t pcur = 0;
  auto pred_union = [&](const MemberSet& over, MemberSet& out) {
    out.reset();
    ++pcur;
    for (std::size_t h2 = over.find_first(); h2 != MemberSet::npos;
         h2 = over.find_next(h2)) {
      const std::uint32_t p = c.pred_prof[h2];
      if (pstamp[p] != pcur) {
        pstamp[p] = pcur;
        out |= c.prof_pred[p];
      }
    }
  };

  // seeds are already ¬A-stable, so nodes only need revisiting after a kill;
  // the eventuality walk below reruns only after kills at solid nodes
  std::vector<char> dirty(nnodes, 0);
  bool solid_dirty = !solid_nodes.empty();

  // greatest fixpoint
  bool changed = true;
  while (changed) {
    changed = false;
    // successor continuation
    for (std::size_t t = 0; t < nnodes; ++t) {
      if (edges[t].empty()) continue;
      uni.reset();
      for (std::size_t u : edges[t]) uni |= alive[u];
      if (!can_valid[t] || uni != uni_prev[t]) {
        can_valid[t] = 1;
        uni_prev[t] = uni;
        pred_union(uni, can_step[t]);
      }
      scratch = alive[t];
      scratch -= can_step[t];
      if (scratch.any()) {
        alive[t] -= scratch;
        changed = true;
        dirty[t] = 1;
        if (solid[t]) solid_dirty = true;
      }
    }
    // ¬A witnesses at the same node: hues in one r_A class share the witness
    // condition, so carriers are killed class-wise in a batch
    for (std::size_t t = 0; t < nnodes; ++t) {
      if (!dirty[t]) continue;
      dirty[t] = 0;
      std::vector<std::uint32_t>& lc = live_classes[t];
      for (std::size_t ki = 0; ki < lc.size();) {
        scratch = alive[t];
        scratch &= c.ra_members[lc[ki]];
        if (!scratch.any()) {
          lc[ki] = lc.back();
          lc.pop_back();
          continue;
        }
        for (std::size_t i = 0; i < c.fnegall.size(); ++i) {
          uni = scratch;
          uni &= c.hues_with[c.fnegall[i]];
          if (!uni.any()) continue;
          wit = scratch;
          wit &= c.hues_with[c.fnegall_want[i]];
          if (wit.any()) continue;
          alive[t] -= uni;
          scratch -= uni;
          changed = true;
          dirty[t] = 1;
          if (solid[t]) solid_dirty = true;
          if (!scratch.any()) break;
        }
        ++ki;
      }
    }
    // the cheap passes converge first; the eventuality walk below reruns
    // only when they are stable and it still removed something
    if (changed) continue;
    if (!solid_dirty) continue;
    solid_dirty = false;
    // pending eventualities must reach witnesses inside solid regions; a
    // solid node's successors are all solid, so the whole walk stays there
    for (std::size_t i = 0; i < c.funtil.size(); ++i) {
      const std::size_t m = c.funtil[i];
      const std::size_t beta = c.funtil_beta[i];
      bool needed = false;
      for (std::size_t t : solid_nodes) {
        scratch = alive[t];
        scratch &= c.hues_with[m];
        scratch -= c.hues_with[beta];
        if (scratch.any()) {
          needed = true;
          break;
        }
      }
      if (!needed) continue;
      std::vector<std::size_t> queue;
      for (std::size_t t : solid_nodes) {
        reach[t] = alive[t];
        reach[t] &= c.hues_with[beta];
        gain[t] = reach[t];
        if (gain[t].any()) queue.push_back(t);
      }
      // walk backwards over surviving r_X pairs, frontier-wise
      for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const std::size_t u = queue[qi];
        if (!gain[u].any()) continue;
        pred_union(gain[u], uni);
        gain[u].reset();
        for (std::size_t t : back[u]) {
          if (!solid[t]) continue;
          scratch = alive[t];
          scratch &= uni;
          scratch -= reach[t];
          if (scratch.any()) {
            reach[t] |= scratch;
            bool was_pending = gain[t].any();
            gain[t] |= scratch;
            if (!was_pending) queue.push_back(t);
          }
        }
      }
      for (std::size_t t : solid_nodes) {
        scratch = alive[t];
        scratch &= c.hues_with[m];
        scratch -= c.hues_with[beta];
        scratch -= reach[t];
        if (scratch.any()) {
          alive[t] -= scratch;
          changed = true;
          dirty[t] = 1;
          solid_dirty = true;
        }
      }
    }
  }

  // embedding: each phue of a closed node inside some surviving hue (once no
  // leaves remain this covers the root's nominated phue in particular)
  for (NodeId t = 0; t < nnodes; ++t) {
    if (!closed[t]) continue;
    for (std::uint32_t i = 0; i < nodes_[t].label.size(); ++i) {
      bool embeds = false;
      for (std::size_t h = alive[t].find_first();
           h != MemberSet::npos && !embeds; h = alive[t].find_next(h))
        if (nodes_[t].label[i].is_subset_of(c.hues[h])) embeds = true;
      if (!embeds)
        return CheckReport::fail("phue n" + std::to_string(t) + "." +
                                 std::to_string(i) +
                                 " matches no realizable hue");
    }
  }
  return CheckReport::pass();
}

}  // namespace ctlstar
