#pragma once
// hue.hpp — the hue / colour algebra: MPC-based hues over a closure set, the
// step relation r_X and same-state relation r_A, colours, hue threads, and a
// product viability engine that powers the linear-time satisfiability oracle
// and model certification.

#include <ctlstar/formula.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ctlstar {

/// Raised when a configured resource cap (hue pairs, product size) is hit.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultHuePairCap = 24;
inline constexpr std::size_t kHueOutputGuard = std::size_t{1} << 21;

// ─────────────────────────────────────────────────────────────────────────────
// Hue predicate and enumeration
// ─────────────────────────────────────────────────────────────────────────────

/// A hue is an MPC subset that is coherent for until and path quantifiers:
///   H2  if aUb is present and b is not, a must be;
///   H3  if aUb is absent, b must be absent;
///   H4  if Aa is present, a must be (the path at hand is one of "all paths").
/// A hue also never contains ~true, i.e. `true` is present whenever the
/// closure mentions it; without this, sets built over cl(false) would pass.
inline bool is_hue(const ClosureSet& cl, const MemberSet& a) {
  if (!cl.is_mpc(a)) return false;
  if (auto ti = cl.true_index(); ti && !a.test(*ti)) return false;
  for (std::size_t i = 0; i < cl.size(); ++i) {
    switch (cl.form(i)) {
      case MemberForm::FUntil:
        if (a.test(i)) {
          if (!a.test(cl.op1(i)) && !a.test(cl.op0(i))) return false;  // H2
        } else {
          if (a.test(cl.op1(i))) return false;  // H3
        }
        break;
      case MemberForm::FAll:
        if (a.test(i) && !a.test(cl.op0(i))) return false;  // H4
        break;
      default:
        break;
    }
  }
  return true;
}

/// All hues over the closure, in a fixed deterministic order: one member is
/// chosen per negation pair (the MPC backbone), the backbone is walked in
/// ascending bitmask order, and non-hues are filtered out.
inline std::vector<MemberSet> enumerate_hues(
    const ClosureSet& cl, std::size_t pair_cap = kDefaultHuePairCap) {
  std::size_t pairs = cl.pair_count();
  if (pairs > pair_cap)
    throw ResourceError("hue enumeration cap exceeded: " +
                        std::to_string(pairs) + " closure pairs > cap " +
                        std::to_string(pair_cap));
  std::vector<std::pair<std::size_t, std::size_t>> pr;
  for (std::size_t i = 0; i < cl.size(); ++i)
    if (i < cl.negation_of(i)) pr.emplace_back(i, cl.negation_of(i));
  std::vector<MemberSet> out;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << pr.size()); ++m) {
    MemberSet s(cl.size());
    for (std::size_t k = 0; k < pr.size(); ++k)
      s.set((m >> k) & 1 ? pr[k].second : pr[k].first);
    if (is_hue(cl, s)) {
      out.push_back(std::move(s));
      if (out.size() > kHueOutputGuard)
        throw ResourceError("hue enumeration output guard exceeded");
    }
  }
  return out;
}

// ─────────────────────────────────────────────────────────────────────────────
// Step and same-state relations
// ─────────────────────────────────────────────────────────────────────────────

/// Everything an r_X-successor of `a` is forced to contain:
///   R1  Xa present       -> successor contains a;
///   R2  ~Xa present      -> successor contains ~a;
///   R3  aUb and ~b both  -> successor contains aUb;
///   R4  ~(aUb) and a     -> successor contains ~(aUb).
/// All four are "must contain" constraints, so r_X is a subset test.
inline MemberSet rx_requirements(const ClosureSet& cl, const MemberSet& a) {
  MemberSet req(cl.size());
  for (std::size_t i = 0; i < cl.size(); ++i) {
    if (!a.test(i)) continue;
    switch (cl.form(i)) {
      case MemberForm::FNext:
        req.set(cl.op0(i));
        break;
      case MemberForm::FNegNext:
        req.set(cl.negation_of(cl.op0(i)));
        break;
      case MemberForm::FUntil:
        if (a.test(cl.negation_of(cl.op1(i)))) req.set(i);
        break;
      case MemberForm::FNegUntil:
        if (a.test(cl.op0(i))) req.set(i);
        break;
      default:
        break;
    }
  }
  return req;
}

inline bool rx(const ClosureSet& cl, const MemberSet& a, const MemberSet& b) {
  return rx_requirements(cl, a).is_subset_of(b);
}

/// r_A: the hues agree on atoms (A1) and on A-quantified members (A2).
inline bool ra(const ClosureSet& cl, const MemberSet& a, const MemberSet& b) {
  for (std::size_t i : cl.atom_members())
    if (a.test(i) != b.test(i)) return false;
  for (std::size_t i = 0; i < cl.size(); ++i)
    if (cl.form(i) == MemberForm::FAll && a.test(i) != b.test(i)) return false;
  return true;
}

/// A colour is a non-empty set of hues that pairwise satisfy r_A (C1) and in
/// which every ~A-claim has a witnessing hue (C2): if ~Aa is in some hue,
/// another hue of the set contains ~a.
inline bool is_colour(const ClosureSet& cl, const std::vector<MemberSet>& hs) {
  if (hs.empty()) return false;
  for (std::size_t i = 0; i < hs.size(); ++i)
    for (std::size_t j = i + 1; j < hs.size(); ++j)
      if (!ra(cl, hs[i], hs[j])) return false;
  for (const MemberSet& a : hs) {
    for (std::size_t i = 0; i < cl.size(); ++i) {
      if (cl.form(i) != MemberForm::FNegAll || !a.test(i)) continue;
      std::size_t neg_body = cl.negation_of(cl.op0(i));
      bool witnessed = false;
      for (const MemberSet& b : hs)
        if (b.test(neg_body)) {
          witnessed = true;
          break;
        }
      if (!witnessed) return false;
    }
  }
  return true;
}

/// R_X between colours: every hue of `d` has an r_X-predecessor in `c`.
inline bool big_rx(const ClosureSet& cl, const std::vector<MemberSet>& c,
                   const std::vector<MemberSet>& d) {
  for (const MemberSet& b : d) {
    bool covered = false;
    for (const MemberSet& a : c)
      if (rx(cl, a, b)) {
        covered = true;
        break;
      }
    if (!covered) return false;
  }
  return true;
}

// ─────────────────────────────────────────────────────────────────────────────
// Hue threads
// ─────────────────────────────────────────────────────────────────────────────

/// A finite or ultimately periodic sequence of hues (or phues).  An empty
/// loop means the thread is finite.
struct HueThread {
  std::vector<MemberSet> prefix;
  std::vector<MemberSet> loop;

  std::size_t flat_size() const { return prefix.size() + loop.size(); }
  const MemberSet& at(std::size_t i) const {
    return i < prefix.size() ? prefix[i] : loop[i - prefix.size()];
  }
};

/// Consecutive positions are r_X-related, including the wrap from the last
/// loop position back to the first.
inline bool thread_respects_rx(const ClosureSet& cl, const HueThread& th) {
  std::size_t n = th.flat_size();
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!rx(cl, th.at(i), th.at(i + 1))) return false;
  if (!th.loop.empty() && !rx(cl, th.at(n - 1), th.at(th.prefix.size())))
    return false;
  return true;
}

/// Every eventuality aUb present at position i is witnessed by b at some
/// position j >= i; positions in the loop recur, so a witness anywhere in the
/// loop serves every loop position.  Finite threads must witness within the
/// remaining suffix.
inline bool thread_fulfilling(const ClosureSet& cl, const HueThread& th) {
  std::size_t n = th.flat_size();
  auto witnessed_from = [&](std::size_t b_idx, std::size_t from) {
    for (std::size_t j = from; j < n; ++j)
      if (th.at(j).test(b_idx)) return true;
    if (!th.loop.empty())
      for (std::size_t j = th.prefix.size(); j < n; ++j)
        if (th.at(j).test(b_idx)) return true;
    return false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const MemberSet& h = th.at(i);
    for (std::size_t m = 0; m < cl.size(); ++m)
      if (cl.form(m) == MemberForm::FUntil && h.test(m) &&
          !witnessed_from(cl.op1(m), i))
        return false;
  }
  return true;
}

// ─────────────────────────────────────────────────────────────────────────────
// Product viability
//
// Shared engine: given a small state graph and, per state, a set of
// admissible hues (indices into one hue universe), decide from which
// state/hue pairs an infinite fulfilling thread through admissible pairs
// exists.  Used by the linear-time oracle (one state, self-loop), by model
// certification (model states), and by the tableau's loop checks (nodes).
// ─────────────────────────────────────────────────────────────────────────────

struct ProductSpec {
  std::size_t num_states = 0;
  std::vector<std::vector<std::size_t>> succ;        ///< successor state ids
  std::vector<std::vector<std::size_t>> admissible;  ///< hue indices per state
  /// When set, states without successors act as unconditional sinks: a track
  /// reaching one is accepted with its remaining obligations forgiven.
  bool dead_end_viable = false;
};

/// A lasso through the product; pairs are (state, hue index).
struct ProductThread {
  std::vector<std::pair<std::size_t, std::size_t>> prefix;
  std::vector<std::pair<std::size_t, std::size_t>> loop;
};

class ViableProduct {
 public:
  ViableProduct(const ClosureSet& cl, const std::vector<MemberSet>& hues,
                ProductSpec spec)
      : cl_(&cl), hues_(&hues), spec_(std::move(spec)) {
    build();
    prune();
  }

  bool viable(std::size_t state, std::size_t hue_index) const {
    auto it = node_id(state, hue_index);
    return it != kNoIndex && alive_[it];
  }

  /// Hue indices (ascending) that survived pruning at the given state.
  std::vector<std::size_t> surviving(std::size_t state) const {
    std::vector<std::size_t> out;
    for (auto [h, id] : by_state_[state])
      if (alive_[id]) out.push_back(h);
    return out;
  }

  /// Extracts an infinite fulfilling lasso from a viable pair.  Only
  /// supported without dead-end sinks (every surviving node then has a
  /// surviving successor).
  std::optional<ProductThread> witness(std::size_t state,
                                       std::size_t hue_index) const;

 private:
  struct PNode {
    std::size_t state;
    std::size_t hue;  ///< index into the universe
  };

  std::size_t node_id(std::size_t state, std::size_t hue_index) const {
    const auto& m = by_state_[state];
    auto it = std::lower_bound(m.begin(), m.end(),
                               std::make_pair(hue_index, std::size_t{0}));
    if (it == m.end() || it->first != hue_index) return kNoIndex;
    return it->second;
  }

  void build() {
    by_state_.resize(spec_.num_states);
    for (std::size_t s = 0; s < spec_.num_states; ++s) {
      for (std::size_t h : spec_.admissible[s]) {
        by_state_[s].emplace_back(h, nodes_.size());
        nodes_.push_back({s, h});
      }
      std::sort(by_state_[s].begin(), by_state_[s].end());
    }
    // r_X requirement per distinct hue used.
    std::vector<std::optional<MemberSet>> xreq((*hues_).size());
    auto req_of = [&](std::size_t h) -> const MemberSet& {
      if (!xreq[h]) xreq[h] = rx_requirements(*cl_, (*hues_)[h]);
      return *xreq[h];
    };
    out_.resize(nodes_.size());
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      const MemberSet& need = req_of(nodes_[n].hue);
      for (std::size_t s2 : spec_.succ[nodes_[n].state])
        for (auto [h2, n2] : by_state_[s2])
          if (need.is_subset_of((*hues_)[h2])) out_.push_back_edge(n, n2);
    }
    alive_.assign(nodes_.size(), true);
    sink_.assign(nodes_.size(), false);
    if (spec_.dead_end_viable)
      for (std::size_t n = 0; n < nodes_.size(); ++n)
        if (spec_.succ[nodes_[n].state].empty()) sink_[n] = true;
    for (std::size_t i = 0; i < cl_->size(); ++i)
      if (cl_->form(i) == MemberForm::FUntil) untils_.push_back(i);
  }

  void prune() {
    bool changed = true;
    while (changed) {
      changed = false;
      // A surviving non-sink must keep a surviving successor.
      bool step = true;
      while (step) {
        step = false;
        for (std::size_t n = 0; n < nodes_.size(); ++n) {
          if (!alive_[n] || sink_[n]) continue;
          bool has = false;
          for (std::size_t m : out_.edges(n))
            if (alive_[m]) {
              has = true;
              break;
            }
          if (!has) {
            alive_[n] = false;
            step = changed = true;
          }
        }
      }
      // Each pending eventuality must be able to reach a witness (or a sink).
      for (std::size_t u : untils_) {
        std::size_t bidx = cl_->op1(u);
        std::vector<char> reach(nodes_.size(), 0);
        for (std::size_t n = 0; n < nodes_.size(); ++n)
          if (alive_[n] && (sink_[n] || (*hues_)[nodes_[n].hue].test(bidx)))
            reach[n] = 1;
        bool grow = true;
        while (grow) {
          grow = false;
          for (std::size_t n = 0; n < nodes_.size(); ++n) {
            if (!alive_[n] || reach[n]) continue;
            for (std::size_t m : out_.edges(n))
              if (alive_[m] && reach[m]) {
                reach[n] = 1;
                grow = true;
                break;
              }
          }
        }
        for (std::size_t n = 0; n < nodes_.size(); ++n)
          if (alive_[n] && !sink_[n] && (*hues_)[nodes_[n].hue].test(u) &&
              !reach[n]) {
            alive_[n] = false;
            changed = true;
          }
      }
    }
  }

  // Flat adjacency storage (edges appended in node order during build).
  struct Adjacency {
    std::vector<std::vector<std::uint32_t>> lists;
    void resize(std::size_t n) { lists.resize(n); }
    void push_back_edge(std::size_t from, std::size_t to) {
      lists[from].push_back(static_cast<std::uint32_t>(to));
    }
    const std::vector<std::uint32_t>& edges(std::size_t n) const {
      return lists[n];
    }
  };

  const ClosureSet* cl_;
  const std::vector<MemberSet>* hues_;
  ProductSpec spec_;
  std::vector<PNode> nodes_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> by_state_;
  Adjacency out_;
  std::vector<char> alive_;
  std::vector<char> sink_;
  std::vector<std::size_t> untils_;

  // witness() helpers
  std::vector<std::size_t> shortest_path(std::size_t from, std::size_t to,
                                         const std::vector<char>& allowed) const;
};

inline std::vector<std::size_t> ViableProduct::shortest_path(
    std::size_t from, std::size_t to, const std::vector<char>& allowed) const {
  // BFS over alive nodes restricted to `allowed`; returns from..to inclusive.
  std::vector<std::size_t> parent(nodes_.size(), kNoIndex);
  std::vector<std::size_t> queue{from};
  std::vector<char> seen(nodes_.size(), 0);
  seen[from] = 1;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    std::size_t n = queue[qi];
    for (std::size_t m : out_.edges(n)) {
      if (!alive_[m] || !allowed[m] || seen[m]) continue;
      seen[m] = 1;
      parent[m] = n;
      if (m == to) {
        std::vector<std::size_t> path{to};
        for (std::size_t c = to; c != from; c = parent[c]) path.push_back(parent[c]);
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(m);
    }
  }
  if (from == to) return {from};
  return {};
}

inline std::optional<ProductThread> ViableProduct::witness(
    std::size_t state, std::size_t hue_index) const {
  std::size_t start = node_id(state, hue_index);
  if (start == kNoIndex || !alive_[start] || spec_.dead_end_viable)
    return std::nullopt;

  // Strongly connected components of the surviving subgraph (iterative
  // Tarjan), then pick a terminal SCC reachable from `start`.  Every
  // survivor has a surviving successor, so terminal SCCs are cycles or
  // larger and reachable from everywhere.
  std::size_t n = nodes_.size();
  std::vector<std::size_t> comp(n, kNoIndex), low(n), disc(n, kNoIndex), stk;
  std::vector<char> on_stk(n, 0);
  std::size_t timer = 0, ncomp = 0;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, edge pos)
  for (std::size_t root = 0; root < n; ++root) {
    if (!alive_[root] || disc[root] != kNoIndex) continue;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      auto& [v, ei] = call.back();
      if (ei == 0) {
        disc[v] = low[v] = timer++;
        stk.push_back(v);
        on_stk[v] = 1;
      }
      bool descended = false;
      const auto& es = out_.edges(v);
      while (ei < es.size()) {
        std::size_t w = es[ei++];
        if (!alive_[w]) continue;
        if (disc[w] == kNoIndex) {
          call.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stk[w]) low[v] = std::min(low[v], disc[w]);
      }
      if (descended) continue;
      if (low[v] == disc[v]) {
        while (true) {
          std::size_t w = stk.back();
          stk.pop_back();
          on_stk[w] = 0;
          comp[w] = ncomp;
          if (w == v) break;
        }
        ++ncomp;
      }
      std::size_t finished = v;
      call.pop_back();
      if (!call.empty())
        low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }
  // Terminal components: no surviving edge leaves them.
  std::vector<char> terminal(ncomp, 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (!alive_[v]) continue;
    for (std::size_t w : out_.edges(v))
      if (alive_[w] && comp[w] != comp[v]) terminal[comp[v]] = 0;
  }
  // BFS from start to the first node lying in a terminal SCC.
  std::vector<char> everywhere(n, 1);
  std::vector<std::size_t> entry_path;
  {
    std::vector<std::size_t> parent(n, kNoIndex), queue{start};
    std::vector<char> seen(n, 0);
    seen[start] = 1;
    std::size_t entry = kNoIndex;
    if (terminal[comp[start]]) entry = start;
    for (std::size_t qi = 0; qi < queue.size() && entry == kNoIndex; ++qi) {
      for (std::size_t m : out_.edges(queue[qi])) {
        if (!alive_[m] || seen[m]) continue;
        seen[m] = 1;
        parent[m] = queue[qi];
        if (terminal[comp[m]]) {
          entry = m;
          break;
        }
        queue.push_back(m);
      }
    }
    if (entry == kNoIndex) return std::nullopt;  // cannot happen for survivors
    for (std::size_t c = entry; c != kNoIndex; c = parent[c])
      entry_path.push_back(c);
    std::reverse(entry_path.begin(), entry_path.end());
  }
  std::size_t entry = entry_path.back();
  std::vector<char> in_t(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (alive_[v] && comp[v] == comp[entry]) in_t[v] = 1;

  // Stitch a cycle through the terminal SCC that witnesses every eventuality
  // present in it.
  std::vector<std::size_t> targets;
  for (std::size_t u : untils_) {
    bool present = false;
    for (std::size_t v = 0; v < n; ++v)
      if (in_t[v] && (*hues_)[nodes_[v].hue].test(u)) {
        present = true;
        break;
      }
    if (!present) continue;
    std::size_t bidx = cl_->op1(u);
    std::size_t w = kNoIndex;
    for (std::size_t v = 0; v < n; ++v)
      if (in_t[v] && (*hues_)[nodes_[v].hue].test(bidx)) {
        w = v;
        break;
      }
    if (w == kNoIndex) return std::nullopt;  // cannot happen after pruning
    targets.push_back(w);
  }
  std::vector<std::size_t> cycle{entry};
  std::size_t cur = entry;
  for (std::size_t w : targets) {
    if (w == cur) continue;
    auto seg = shortest_path(cur, w, in_t);
    cycle.insert(cycle.end(), seg.begin() + 1, seg.end());
    cur = w;
  }
  {
    // Close the cycle; force at least one step so the loop is a real cycle.
    std::size_t step = kNoIndex;
    for (std::size_t m : out_.edges(cur))
      if (alive_[m] && in_t[m]) {
        step = m;
        break;
      }
    if (step == kNoIndex) return std::nullopt;
    if (step != entry) {
      auto seg = shortest_path(step, entry, in_t);
      cycle.push_back(step);
      cycle.insert(cycle.end(), seg.begin() + 1, seg.end());
    } else {
      cycle.push_back(step);
    }
    cycle.pop_back();  // entry repeated at the end
  }

  ProductThread out;
  for (std::size_t i = 0; i + 1 < entry_path.size(); ++i)
    out.prefix.emplace_back(nodes_[entry_path[i]].state,
                            nodes_[entry_path[i]].hue);
  for (std::size_t v : cycle) out.loop.emplace_back(nodes_[v].state, nodes_[v].hue);
  return out;
}

/// Maps a product lasso to its hue thread.
inline HueThread to_hue_thread(const std::vector<MemberSet>& hues,
                               const ProductThread& pt) {
  HueThread th;
  for (auto [s, h] : pt.prefix) th.prefix.push_back(hues[h]);
  for (auto [s, h] : pt.loop) th.loop.push_back(hues[h]);
  return th;
}

// ─────────────────────────────────────────────────────────────────────────────
// Linear-time satisfiability oracle
// ─────────────────────────────────────────────────────────────────────────────

/// Decides satisfiability of an A-free formula over infinite paths: some hue
/// containing the formula must start a viable thread through the full hue
/// graph (one pseudo-state carrying every hue, self-looped).
inline bool ltl_sat_oracle(FormulaTable& t, FormulaId f,
                           std::size_t pair_cap = kDefaultHuePairCap) {
  if (t.mentions_allpaths(f))
    throw std::invalid_argument("ltl_sat_oracle: formula mentions A");
  ClosureSet cl(t, f);
  std::vector<MemberSet> hues = enumerate_hues(cl, pair_cap);
  ProductSpec spec;
  spec.num_states = 1;
  spec.succ = {{0}};
  spec.admissible.emplace_back(hues.size());
  for (std::size_t i = 0; i < hues.size(); ++i) spec.admissible[0][i] = i;
  ViableProduct vp(cl, hues, std::move(spec));
  for (std::size_t i = 0; i < hues.size(); ++i)
    if (hues[i].test(cl.root_index()) && vp.viable(0, i)) return true;
  return false;
}

}  // namespace ctlstar
