#pragma once
// model.hpp — finite total transition structures, lasso certificates, and the
// hue-product model-checking oracle: path_exists over linear-time formulas,
// full recursive verify, and the actual-hue computation realizable_hues.
//
// Path quantifiers are handled by labeling: every A-subformula is evaluated
// innermost-first as a state predicate and replaced by a reserved pseudo-atom
// ("@0", "@1", ...), names no user formula can contain.

#include <ctlstar/hue.hpp>
#include <ctlstar/tableau.hpp>

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace ctlstar {

struct TransitionStructure {
  std::size_t num_states = 0;
  std::vector<std::vector<std::size_t>> succ;  ///< R as adjacency lists
  std::vector<std::set<std::string>> atoms;    ///< g: true atoms per state

  bool is_total() const {
    if (succ.size() != num_states || atoms.size() != num_states) return false;
    for (const auto& v : succ)
      if (v.empty()) return false;
    return true;
  }
};

/// Finite presentation of an ultimately periodic fullpath prefix·loop^ω.
struct Lasso {
  std::vector<std::size_t> prefix;
  std::vector<std::size_t> loop;
};

/// Consecutive lasso positions (prefix into loop, loop wrap) must be R-edges.
inline bool lasso_valid(const TransitionStructure& m, const Lasso& l) {
  if (l.loop.empty()) return false;
  std::vector<std::size_t> flat = l.prefix;
  flat.insert(flat.end(), l.loop.begin(), l.loop.end());
  for (std::size_t s : flat)
    if (s >= m.num_states) return false;
  auto edge = [&](std::size_t a, std::size_t b) {
    const auto& v = m.succ[a];
    return std::find(v.begin(), v.end(), b) != v.end();
  };
  for (std::size_t i = 0; i + 1 < flat.size(); ++i)
    if (!edge(flat[i], flat[i + 1])) return false;
  return edge(flat.back(), l.loop.front());
}

struct PathResult {
  bool holds = false;
  std::optional<Lasso> witness;
};

/// Does some fullpath from `s` satisfy the linear-time formula `f`?  Decided
/// on the product of the structure with the hue graph of cl(f); a witnessing
/// lasso accompanies a positive answer.  `f` must be free of A (callers
/// reduce path quantifiers to pseudo-atom labels first).
inline PathResult path_exists(const TransitionStructure& m, std::size_t s,
                              FormulaTable& t, FormulaId f,
                              std::size_t pair_cap = kDefaultHuePairCap) {
  if (t.mentions_allpaths(f))
    throw std::invalid_argument("path_exists: formula mentions A");
  ClosureSet cl(t, f);
  std::vector<MemberSet> hues = enumerate_hues(cl, pair_cap);
  ProductSpec spec;
  spec.num_states = m.num_states;
  spec.succ = m.succ;
  spec.admissible.resize(m.num_states);
  for (std::size_t st = 0; st < m.num_states; ++st)
    for (std::size_t h = 0; h < hues.size(); ++h) {
      bool match = true;
      for (std::size_t i : cl.atom_members())
        if (hues[h].test(i) !=
            (m.atoms[st].count(cl.table().atom_name(cl.member(i))) > 0)) {
          match = false;
          break;
        }
      if (match) spec.admissible[st].push_back(h);
    }
  ViableProduct vp(cl, hues, std::move(spec));
  for (std::size_t h = 0; h < hues.size(); ++h) {
    if (!hues[h].test(cl.root_index()) || !vp.viable(s, h)) continue;
    auto w = vp.witness(s, h);
    if (!w) continue;
    Lasso lasso;
    for (auto [st, hu] : w->prefix) lasso.prefix.push_back(st);
    for (auto [st, hu] : w->loop) lasso.loop.push_back(st);
    return {true, std::move(lasso)};
  }
  return {false, std::nullopt};
}

namespace detail {

/// Labels every A-subformula of the given roots as a state predicate on a
/// copy of the structure: Aψ holds at s iff no fullpath from s satisfies ¬ψ.
/// Returns the augmented structure whose g carries the pseudo-atoms.
template <typename RootRange>
inline TransitionStructure label_allpaths(const TransitionStructure& m,
                                          FormulaTable& t,
                                          const RootRange& roots,
                                          AllpathsRegistry& reg,
                                          std::size_t pair_cap) {
  for (FormulaId f : roots) reg.collect(f);
  TransitionStructure aug = m;
  for (std::size_t k = 0; k < reg.size(); ++k) {
    FormulaId refutation = reg.reduce(t.neg(reg.body(k)));
    for (std::size_t s = 0; s < aug.num_states; ++s)
      if (!path_exists(aug, s, t, refutation, pair_cap).holds)
        aug.atoms[s].insert(AllpathsRegistry::pseudo_name(k));
  }
  return aug;
}

}  // namespace detail

/// Full recursive check: does some fullpath from `s` satisfy `f`?  Path
/// quantifiers are evaluated innermost-first via path_exists on their
/// negations.  Atom names starting with '@' are reserved for this reduction.
inline PathResult verify(const TransitionStructure& m, std::size_t s,
                         FormulaTable& t, FormulaId f,
                         std::size_t pair_cap = kDefaultHuePairCap) {
  detail::AllpathsRegistry reg(t);
  TransitionStructure aug =
      detail::label_allpaths(m, t, std::vector<FormulaId>{f}, reg, pair_cap);
  return path_exists(aug, s, t, reg.reduce(f), pair_cap);
}

/// The actual hues of every state: a hue is actual at s iff some fullpath
/// from s makes exactly the hue's members true.  Computed as local matching
/// (atoms against g(s), A-members against their labels) plus a fulfilling
/// infinite thread through locally matching hues.
struct ActualHues {
  std::vector<MemberSet> universe;                 ///< the closure's hues
  std::vector<std::vector<std::size_t>> by_state;  ///< actual indices per state
};

inline ActualHues realizable_hues(const TransitionStructure& m, ClosureSet& cl,
                                  std::size_t pair_cap = kDefaultHuePairCap) {
  FormulaTable& t = cl.table();
  detail::AllpathsRegistry reg(t);
  std::vector<FormulaId> roots;
  for (std::size_t i = 0; i < cl.size(); ++i) roots.push_back(cl.member(i));
  TransitionStructure aug = detail::label_allpaths(m, t, roots, reg, pair_cap);

  ActualHues out;
  out.universe = enumerate_hues(cl, pair_cap);
  ProductSpec spec;
  spec.num_states = m.num_states;
  spec.succ = m.succ;
  spec.admissible.resize(m.num_states);
  for (std::size_t s = 0; s < m.num_states; ++s) {
    for (std::size_t h = 0; h < out.universe.size(); ++h) {
      bool match = true;
      for (std::size_t i : cl.atom_members())
        if (out.universe[h].test(i) !=
            (aug.atoms[s].count(t.atom_name(cl.member(i))) > 0)) {
          match = false;
          break;
        }
      for (std::size_t i = 0; match && i < cl.size(); ++i) {
        if (cl.form(i) != MemberForm::FAll) continue;
        std::string pn =
            detail::AllpathsRegistry::pseudo_name(reg.index_of(cl.member(i)));
        if (out.universe[h].test(i) != (aug.atoms[s].count(pn) > 0))
          match = false;
      }
      if (match) spec.admissible[s].push_back(h);
    }
  }
  ViableProduct vp(cl, out.universe, std::move(spec));
  out.by_state.resize(m.num_states);
  for (std::size_t s = 0; s < m.num_states; ++s)
    out.by_state[s] = vp.surviving(s);
  return out;
}

// ─────────────────────────────────────────────────────────────────────────────
// Extraction: read a finished tableau as a transition structure.  States are
// the nodes, transitions are all successor edges, and a state satisfies an
// atom exactly when some phue of the node contains it.  The caller is
// responsible for only extracting finished tableaux; a remaining leaf would
// break totality and is rejected outright.
// ─────────────────────────────────────────────────────────────────────────────

inline TransitionStructure extract(const Tableau& tb) {
  const ClosureSet& cl = tb.closure();
  TransitionStructure m;
  m.num_states = tb.size();
  m.succ.resize(m.num_states);
  m.atoms.resize(m.num_states);
  for (NodeId t = 0; t < tb.size(); ++t) {
    const Node& n = tb.node(t);
    for (NodeId u : n.succ)
      if (u != kNoNode &&
          std::find(m.succ[t].begin(), m.succ[t].end(), u) == m.succ[t].end())
        m.succ[t].push_back(u);
    for (std::size_t a : cl.atom_members())
      for (const MemberSet& p : n.label)
        if (p.test(a)) m.atoms[t].insert(tb.table().atom_name(cl.member(a)));
  }
  if (!m.is_total())
    throw std::logic_error("extract: tableau still has leaves");
  return m;
}

}  // namespace ctlstar
