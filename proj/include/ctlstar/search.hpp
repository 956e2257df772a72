#pragma once
// search.hpp — backtracking construction of a finished tableau: rule
// scheduling, choice-point management, bounds, and verdict assembly.
//
// The search runs depth-first over choice points.  Deterministic local rules
// (CONJ, NEC, ATM, NAT) are applied to fixpoint between choice points; the
// alternatives of one choice point are the variants of a single rule locus
// (the two disjunct choices, the until split, the POS targets, the PRED
// predecessors, or the LOOP targets followed by NOLOOP).  Contradictions are
// checked after every application, NTP and LG after every accepted LOOP and
// at every candidate finish, and a sat verdict is only issued once the
// extracted structure passes the independent model-checking oracle.

#include <ctlstar/model.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ctlstar {

struct SearchConfig {
  enum class Mode { Bounded, Complete };
  Mode mode = Mode::Bounded;
  std::size_t branch_bound = 50;    ///< max tableau tree depth per branch
  std::size_t node_bound = 20000;   ///< max nodes created over the search
  std::size_t hue_cap = kDefaultHuePairCap;
  std::chrono::milliseconds timeout{0};  ///< zero disables
  bool assume_bound_sufficient = false;  ///< treat bound cuts as exhaustive
  bool rep_cut = false;                  ///< conservative repetition cut
  std::uint64_t seed = 0;  ///< nonzero shuffles alternative order
};

struct Verdict {
  enum class Kind { Sat, Unsat, Unknown };
  Kind kind = Kind::Unknown;
  std::optional<TransitionStructure> model;  ///< sat only
  std::optional<Lasso> witness;              ///< sat only
  std::map<std::string, double> stats;
  std::string reason;        ///< unknown only: bound-hit | timeout | hue-cap
  std::string tableau_text;  ///< serialized finished tableau (sat only)
};

inline constexpr std::size_t kBranchBoundCeiling = 1000000000;

/// Branch-depth bound sufficient in principle: 2^(2^(2^l)) for a formula of
/// length l, saturated at the configured ceiling.
inline std::size_t theoretical_branch_bound(
    std::size_t length, std::size_t ceiling = kBranchBoundCeiling) {
  if (length >= 5) return ceiling;
  std::uint64_t t1 = std::uint64_t{1} << length;
  if (t1 >= 31) return ceiling;
  std::uint64_t t2 = std::uint64_t{1} << t1;
  if (t2 >= 31) return ceiling;
  return static_cast<std::size_t>(
      std::min<std::uint64_t>(std::uint64_t{1} << t2, ceiling));
}

inline std::size_t theoretical_branch_bound(
    const FormulaTable& t, FormulaId f,
    std::size_t ceiling = kBranchBoundCeiling) {
  return theoretical_branch_bound(t.node_count(f), ceiling);
}

// ─────────────────────────────────────────────────────────────────────────────
// Choice grouping
// ─────────────────────────────────────────────────────────────────────────────

namespace detail {

/// Priority class: lower explores first.  Deterministic local rules close a
/// node's labels; LOOP comes right after so fresh leaves fold back before
/// either branching over their content or expanding below them.
inline int rule_class(Rule r) {
  switch (r) {
    case Rule::TwoNeg:
    case Rule::Conj:
    case Rule::Nec:
    case Rule::Atm:
    case Rule::Nat: return 1;
    case Rule::Loop:
    case Rule::NoLoop: return 2;
    case Rule::Dis1:
    case Rule::Dis2:
    case Rule::Unt1:
    case Rule::Unt2:
    case Rule::Nun1:
    case Rule::Nun2:
    case Rule::Pos: return 3;
    case Rule::Pred: return 4;
    case Rule::Nex:
    case Rule::Nnx: return 5;
  }
  return 6;
}

/// Instances with equal keys are alternatives of one choice point; the
/// enumeration order keeps them adjacent.
inline std::uint64_t group_key(const RuleInstance& r) {
  auto family = [](Rule x) -> std::uint64_t {
    switch (x) {
      case Rule::Dis1:
      case Rule::Dis2: return 1;
      case Rule::Unt1:
      case Rule::Unt2: return 2;
      case Rule::Nun1:
      case Rule::Nun2: return 3;
      case Rule::Pos: return 4;
      case Rule::Pred: return 5;
      case Rule::Loop:
      case Rule::NoLoop: return 6;
      default: return 0;
    }
  };
  std::uint64_t f = family(r.rule);
  if (f == 6) return (f << 56) | r.node;
  std::uint64_t locus = (std::uint64_t(r.node) << 34) |
                        (std::uint64_t(r.slot) << 22) |
                        (std::uint64_t(r.member) & 0x3fffffu);
  if (f != 0) return (f << 56) | locus;
  return (std::uint64_t(7) << 56) | (std::uint64_t(r.rule) << 48) | locus;
}

struct ChoiceGroup {
  int cls = 0;
  std::size_t pos = 0;  ///< position of the first instance in the flat list
  std::vector<RuleInstance> alts;
};

inline std::optional<ChoiceGroup> next_group(const Tableau& tb) {
  std::vector<RuleInstance> cs = tb.enumerate_choices();
  std::optional<ChoiceGroup> best;
  std::size_t i = 0;
  while (i < cs.size()) {
    std::size_t j = i + 1;
    while (j < cs.size() && group_key(cs[j]) == group_key(cs[i])) ++j;
    int cls = rule_class(cs[i].rule);
    if (!best || cls < best->cls)
      best = ChoiceGroup{cls, i,
                         std::vector<RuleInstance>(cs.begin() + i,
                                                   cs.begin() + j)};
    i = j;
  }
  return best;
}

}  // namespace detail

/// The single instance the search would try next (first alternative of the
/// highest-priority choice point), or nothing once no rule applies.
inline std::optional<RuleInstance> pick_choice(const Tableau& tb,
                                               const SearchConfig& = {}) {
  auto g = detail::next_group(tb);
  if (!g) return std::nullopt;
  return g->alts.front();
}

// ─────────────────────────────────────────────────────────────────────────────
// The searcher
// ─────────────────────────────────────────────────────────────────────────────

namespace detail {

class Searcher {
 public:
  Searcher(FormulaTable& t, FormulaId f, const SearchConfig& cfg)
      : table_(t), formula_(f), cfg_(cfg), tb_(t, f), rng_(cfg.seed) {}

  Verdict run() {
    start_ = Clock::now();
    branch_bound_ = cfg_.branch_bound;
    bool saturated = false;
    if (cfg_.mode == SearchConfig::Mode::Complete) {
      branch_bound_ = theoretical_branch_bound(table_, formula_);
      saturated = branch_bound_ == kBranchBoundCeiling;
    }
    bool found = false;
    ++checks_;
    if (tb_.check_contradiction().passed) found = dfs(0);

    Verdict v;
    v.stats["nodes_created"] = double(nodes_created_);
    v.stats["rules_applied"] = double(rules_);
    v.stats["backtracks"] = double(backtracks_);
    v.stats["checks_run"] = double(checks_);
    v.stats["bound_cuts"] = double(bound_cuts_);
    v.stats["rep_cuts"] = double(rep_cuts_);
    v.stats["lg_skips"] = double(lg_skips_);
    v.stats["ntp_rejections"] = double(ntp_fails_);
    v.stats["lg_rejections"] = double(lg_fails_);
    v.stats["finish_attempts"] = double(finish_attempts_);
    v.stats["finish_shaped"] = double(finish_shaped_);
    v.stats["certification_failures"] = double(cert_failures_);
    v.stats["branch_bound"] = double(branch_bound_);
    if (saturated) v.stats["branch_bound_saturated"] = 1.0;
    v.stats["elapsed_ms"] = double(
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() -
                                                              start_)
            .count());
    if (found) {
      v.kind = Verdict::Kind::Sat;
      v.model = std::move(model_);
      v.witness = std::move(witness_);
      v.tableau_text = std::move(tableau_text_);
    } else if (cut_timeout_) {
      v.kind = Verdict::Kind::Unknown;
      v.reason = "timeout";
    } else if (cut_huecap_) {
      v.kind = Verdict::Kind::Unknown;
      v.reason = "hue-cap";
    } else if ((bound_cuts_ > 0 || rep_cuts_ > 0) &&
               !cfg_.assume_bound_sufficient) {
      v.kind = Verdict::Kind::Unknown;
      v.reason = "bound-hit";
    } else {
      v.kind = Verdict::Kind::Unsat;
    }
    return v;
  }

 private:
  using Clock = std::chrono::steady_clock;

  bool expired() {
    if (cfg_.timeout.count() <= 0) return false;
    return Clock::now() - start_ >= cfg_.timeout;
  }

  void unwind(std::vector<UndoToken>& toks) {
    for (auto it = toks.rbegin(); it != toks.rend(); ++it) tb_.undo(*it);
    toks.clear();
  }

  std::size_t depth_of_newest() const {
    std::size_t d = 0;
    for (NodeId c = static_cast<NodeId>(tb_.size() - 1); c != kNoNode;
         c = tb_.node(c).parent)
      ++d;
    return d;
  }

  bool triple_repeat(NodeId u) const {
    NodeId a = tb_.node(u).parent;
    if (a == kNoNode) return false;
    NodeId b = tb_.node(a).parent;
    if (b == kNoNode) return false;
    NodeId c = tb_.node(b).parent;
    if (c == kNoNode) return false;
    return tb_.node(a).label == tb_.node(b).label &&
           tb_.node(b).label == tb_.node(c).label;
  }

  bool loop_checks_ok() {
    ++checks_;
    if (!tb_.check_ntp().passed) {
      ++ntp_fails_;
      return false;
    }
    try {
      ++checks_;
      if (!tb_.check_lg(cfg_.hue_cap).passed) {
        ++lg_fails_;
        return false;
      }
    } catch (const ResourceError&) {
      ++lg_skips_;  // the filter is skipped; certification still guards sat
    }
    return true;
  }

  static Lasso default_lasso(const TransitionStructure& m) {
    std::vector<std::size_t> seq;
    std::map<std::size_t, std::size_t> first;
    std::size_t s = 0;
    while (!first.count(s)) {
      first[s] = seq.size();
      seq.push_back(s);
      s = m.succ[s].front();
    }
    Lasso l;
    l.prefix.assign(seq.begin(), seq.begin() + first[s]);
    l.loop.assign(seq.begin() + first[s], seq.end());
    return l;
  }

  /// No rule applies: confirm the finished shape, run the global checks, and
  /// accept only with an oracle-certified extraction.
  bool finish_candidate() {
    ++finish_attempts_;
    if (tb_.has_leaves() || !tb_.pi_complete() || !tb_.all_supported())
      return false;
    ++finish_shaped_;
    ++checks_;
    if (!tb_.check_ntp().passed) {
      ++ntp_fails_;
      return false;
    }
    if (!loop_checks_ok()) return false;
    TransitionStructure m = extract(tb_);
    PathResult res;
    try {
      res = verify(m, 0, table_, formula_, cfg_.hue_cap);
    } catch (const ResourceError&) {
      cut_huecap_ = true;
      ++cert_failures_;
      return false;
    }
    if (!res.holds) {
      ++cert_failures_;
      return false;
    }
    model_ = std::move(m);
    witness_ = res.witness ? *res.witness : default_lasso(model_);
    tableau_text_ = tb_.serialize();
    return true;
  }

  bool dfs(std::size_t depth) {
    if (expired()) {
      cut_timeout_ = true;
      return false;
    }
    std::vector<UndoToken> local;
    bool result = false;
    while (true) {
      auto g = next_group(tb_);
      if (g && g->cls == 1) {
        local.push_back(tb_.apply(g->alts.front()));
        ++rules_;
        ++checks_;
        if (!tb_.check_contradiction().passed) break;
        if (expired()) {
          cut_timeout_ = true;
          break;
        }
        continue;
      }
      result = g ? explore(std::move(*g), depth) : finish_candidate();
      break;
    }
    unwind(local);
    return result;
  }

  bool explore(ChoiceGroup g, std::size_t depth) {
    if (cfg_.seed != 0 && g.alts.size() > 1)
      std::shuffle(g.alts.begin(), g.alts.end(), rng_);
    bool loop_accepted_before = false;
    for (const RuleInstance& alt : g.alts) {
      if (expired()) {
        cut_timeout_ = true;
        return false;
      }
      if (cfg_.rep_cut && alt.rule == Rule::NoLoop && !loop_accepted_before &&
          triple_repeat(alt.node)) {
        ++rep_cuts_;
        continue;
      }
      std::size_t before = tb_.size();
      UndoToken tok = tb_.apply(alt);
      ++rules_;
      if (tb_.size() > before) {
        nodes_created_ += tb_.size() - before;
        if (nodes_created_ > cfg_.node_bound ||
            depth_of_newest() > branch_bound_) {
          ++bound_cuts_;
          tb_.undo(tok);
          ++backtracks_;
          continue;
        }
      }
      ++checks_;
      if (!tb_.check_contradiction().passed) {
        tb_.undo(tok);
        ++backtracks_;
        continue;
      }
      if (alt.rule == Rule::Loop) {
        if (!loop_checks_ok()) {
          tb_.undo(tok);
          ++backtracks_;
          continue;
        }
        loop_accepted_before = true;
      }
      if (dfs(depth + 1)) {
        tb_.undo(tok);
        return true;
      }
      tb_.undo(tok);
      ++backtracks_;
    }
    return false;
  }

  FormulaTable& table_;
  FormulaId formula_;
  SearchConfig cfg_;
  Tableau tb_;
  std::mt19937_64 rng_;
  Clock::time_point start_{};
  std::size_t branch_bound_ = 0;

  std::size_t nodes_created_ = 0;
  std::size_t rules_ = 0;
  std::size_t backtracks_ = 0;
  std::size_t checks_ = 0;
  std::size_t bound_cuts_ = 0;
  std::size_t rep_cuts_ = 0;
  std::size_t lg_skips_ = 0;
  std::size_t ntp_fails_ = 0;
  std::size_t lg_fails_ = 0;
  std::size_t finish_attempts_ = 0;
  std::size_t finish_shaped_ = 0;
  std::size_t cert_failures_ = 0;
  bool cut_timeout_ = false;
  bool cut_huecap_ = false;

  TransitionStructure model_;
  std::optional<Lasso> witness_;
  std::string tableau_text_;
};

}  // namespace detail

inline Verdict solve(FormulaTable& t, FormulaId f,
                     const SearchConfig& cfg = {}) {
  detail::Searcher s(t, f, cfg);
  return s.run();
}

}  // namespace ctlstar
