// test_model.cpp — transition structures, path_exists / verify via the hue
// product, and the actual-hue computation, cross-checked against brute-force
// semantics on bounded lassos.

#include <catch2/catch_amalgamated.hpp>
#include <ctlstar/model.hpp>

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gen.hpp"
#include "lasso_oracle.hpp"
#include "tableau_builder.hpp"
#include "util.hpp"

using namespace ctlstar;
using testoracle::LassoEval;
using testoracle::Letters;
using testutil::mk_set;

namespace {

TransitionStructure single_state(std::set<std::string> atoms) {
  TransitionStructure m;
  m.num_states = 1;
  m.succ = {{0}};
  m.atoms = {std::move(atoms)};
  return m;
}

TransitionStructure two_cycle(std::set<std::string> a0, std::set<std::string> a1) {
  TransitionStructure m;
  m.num_states = 2;
  m.succ = {{1}, {0}};
  m.atoms = {std::move(a0), std::move(a1)};
  return m;
}

Letters lasso_letters(const TransitionStructure& m, const Lasso& l) {
  Letters out;
  for (std::size_t s : l.prefix) out.push_back(m.atoms[s]);
  for (std::size_t s : l.loop) out.push_back(m.atoms[s]);
  return out;
}

/// Enumerates every lasso from `s` with prefix+loop <= bound; stops early
/// when `fn` returns true.
template <typename Fn>
bool any_lasso(const TransitionStructure& m, std::size_t s, std::size_t bound,
               Fn&& fn) {
  std::vector<std::size_t> flat{s};
  auto edge = [&](std::size_t a, std::size_t b) {
    const auto& v = m.succ[a];
    return std::find(v.begin(), v.end(), b) != v.end();
  };
  struct Frame {
    std::size_t next_choice = 0;
  };
  // Depth-first over successor choices; at every length try all loop starts.
  std::vector<std::size_t> choice{0};
  while (true) {
    for (std::size_t ls = 0; ls < flat.size(); ++ls) {
      if (!edge(flat.back(), flat[ls])) continue;
      Lasso l;
      l.prefix.assign(flat.begin(), flat.begin() + ls);
      l.loop.assign(flat.begin() + ls, flat.end());
      if (fn(l)) return true;
    }
    if (flat.size() < bound) {
      choice.push_back(0);
      flat.push_back(m.succ[flat.back()][0]);
      continue;
    }
    while (true) {
      flat.pop_back();
      std::size_t c = ++choice.back();
      if (flat.empty()) return false;
      const auto& nx = m.succ[flat.back()];
      if (c < nx.size()) {
        flat.push_back(nx[c]);
        break;
      }
      choice.pop_back();
    }
  }
}

/// Brute-force path satisfiability with bounded path quantification: All is
/// checked over all lassos up to the bound from the current state.
class CtlBrute {
 public:
  CtlBrute(const FormulaTable& t, const TransitionStructure& m,
           std::size_t bound)
      : t_(t), m_(m), bound_(bound) {}

  bool exists_path(std::size_t s, FormulaId f) {
    return any_lasso(m_, s, bound_,
                     [&](const Lasso& l) { return sem(l, 0, f); });
  }

 private:
  std::size_t flat_size(const Lasso& l) const {
    return l.prefix.size() + l.loop.size();
  }
  std::size_t state_at(const Lasso& l, std::size_t i) const {
    return i < l.prefix.size() ? l.prefix[i] : l.loop[i - l.prefix.size()];
  }
  std::size_t next(const Lasso& l, std::size_t i) const {
    return i + 1 < flat_size(l) ? i + 1 : l.prefix.size();
  }

  bool sem(const Lasso& l, std::size_t pos, FormulaId f) {
    switch (t_.kind(f)) {
      case Kind::Atom:
        return m_.atoms[state_at(l, pos)].count(t_.atom_name(f)) > 0;
      case Kind::True: return true;
      case Kind::Neg: return !sem(l, pos, t_.node(f).a);
      case Kind::And:
        return sem(l, pos, t_.node(f).a) && sem(l, pos, t_.node(f).b);
      case Kind::Next: return sem(l, next(l, pos), t_.node(f).a);
      case Kind::Until: {
        std::size_t j = pos;
        for (std::size_t step = 0; step <= flat_size(l); ++step) {
          if (sem(l, j, t_.node(f).b)) return true;
          if (!sem(l, j, t_.node(f).a)) return false;
          j = next(l, j);
        }
        return false;
      }
      case Kind::All: {
        std::size_t st = state_at(l, pos);
        auto key = std::make_pair(st, f);
        auto it = amemo_.find(key);
        if (it != amemo_.end()) return it->second;
        bool refuted = any_lasso(m_, st, bound_, [&](const Lasso& tau) {
          return !sem(tau, 0, t_.node(f).a);
        });
        amemo_.emplace(key, !refuted);
        return !refuted;
      }
    }
    return false;
  }

  const FormulaTable& t_;
  const TransitionStructure& m_;
  std::size_t bound_;
  std::map<std::pair<std::size_t, FormulaId>, bool> amemo_;
};

TransitionStructure random_structure(std::mt19937_64& rng, std::size_t max_states) {
  TransitionStructure m;
  m.num_states = 1 + rng() % max_states;
  m.succ.resize(m.num_states);
  m.atoms.resize(m.num_states);
  for (std::size_t s = 0; s < m.num_states; ++s) {
    for (std::size_t s2 = 0; s2 < m.num_states; ++s2)
      if (rng() % 2) m.succ[s].push_back(s2);
    if (m.succ[s].empty()) m.succ[s].push_back(rng() % m.num_states);
    if (rng() % 2) m.atoms[s].insert("p");
    if (rng() % 2) m.atoms[s].insert("q");
  }
  return m;
}

/// Structure whose states are the distinct letters of a word; every
/// consecutive letter pair becomes an edge, so the word itself is a fullpath.
TransitionStructure letter_graph(const Letters& w, std::size_t prefix_len,
                                 std::size_t& start_state) {
  TransitionStructure m;
  std::map<std::set<std::string>, std::size_t> ids;
  auto id_of = [&](const std::set<std::string>& letter) {
    auto it = ids.find(letter);
    if (it != ids.end()) return it->second;
    std::size_t id = m.num_states++;
    ids.emplace(letter, id);
    m.succ.emplace_back();
    m.atoms.push_back(letter);
    return id;
  };
  std::vector<std::size_t> states;
  for (const auto& letter : w) states.push_back(id_of(letter));
  auto link = [&](std::size_t a, std::size_t b) {
    auto& v = m.succ[a];
    if (std::find(v.begin(), v.end(), b) == v.end()) v.push_back(b);
  };
  for (std::size_t i = 0; i + 1 < states.size(); ++i)
    link(states[i], states[i + 1]);
  link(states.back(), states[prefix_len]);
  start_state = states[0];
  return m;
}

}  // namespace

TEST_CASE("path_exists on fixed structures", "[model]") {
  FormulaTable t;
  TransitionStructure m = single_state({"p"});

  SECTION("G p holds with the expected lasso") {
    PathResult r = path_exists(m, 0, t, t.parse("G p"));
    REQUIRE(r.holds);
    REQUIRE(r.witness.has_value());
    REQUIRE(r.witness->prefix.empty());
    REQUIRE(r.witness->loop == std::vector<std::size_t>{0});
    REQUIRE(lasso_valid(m, *r.witness));
  }

  SECTION("F ~p fails on the constant-p loop") {
    REQUIRE_FALSE(path_exists(m, 0, t, t.parse("F ~p")).holds);
  }

  SECTION("path quantifiers are rejected") {
    REQUIRE_THROWS_AS(path_exists(m, 0, t, t.parse("A p")),
                      std::invalid_argument);
  }
}

TEST_CASE("path_exists agrees with bounded lasso enumeration", "[model]") {
  std::mt19937_64 rng(2024);
  int positives = 0;
  for (int round = 0; round < 60; ++round) {
    FormulaTable t;
    FormulaId f = testgen::random_formula(t, rng, 7, 2, false);
    TransitionStructure m = random_structure(rng, 3);
    std::size_t s = rng() % m.num_states;
    PathResult r = path_exists(m, s, t, f);
    INFO(t.render(f));

    bool brute = any_lasso(m, s, 6, [&](const Lasso& l) {
      LassoEval ev(t, lasso_letters(m, l), l.prefix.size());
      return ev.holds(f, 0);
    });
    if (brute) REQUIRE(r.holds);  // a concrete witness can never be denied

    if (r.holds) {
      ++positives;
      REQUIRE(r.witness.has_value());
      REQUIRE(lasso_valid(m, *r.witness));
      REQUIRE((r.witness->prefix.empty() ||
               r.witness->prefix.front() == s));
      if (r.witness->prefix.empty())
        REQUIRE(r.witness->loop.front() == s);
      // the returned lasso must itself satisfy the formula semantically
      LassoEval ev(t, lasso_letters(m, *r.witness), r.witness->prefix.size());
      REQUIRE(ev.holds(f, 0));
    }
  }
  REQUIRE(positives > 15);
}

TEST_CASE("witness lassos chain actual hues through rx", "[model]") {
  std::mt19937_64 rng(5150);
  int checked = 0;
  for (int round = 0; round < 40; ++round) {
    FormulaTable t;
    FormulaId f = testgen::random_formula(t, rng, 7, 2, false);
    TransitionStructure m = random_structure(rng, 3);
    PathResult r = path_exists(m, 0, t, f);
    if (!r.holds) continue;
    ++checked;
    ClosureSet cl(t, f);
    LassoEval ev(t, lasso_letters(m, *r.witness), r.witness->prefix.size());
    HueThread th;
    std::size_t n = r.witness->prefix.size() + r.witness->loop.size();
    for (std::size_t i = 0; i < n; ++i) {
      MemberSet h = cl.empty_set();
      for (std::size_t mi = 0; mi < cl.size(); ++mi)
        if (ev.holds(cl.member(mi), i)) h.set(mi);
      REQUIRE(is_hue(cl, h));  // the actual hue of a real path is a hue
      if (i < r.witness->prefix.size()) th.prefix.push_back(std::move(h));
      else th.loop.push_back(std::move(h));
    }
    REQUIRE(thread_respects_rx(cl, th));
    REQUIRE(thread_fulfilling(cl, th));
  }
  REQUIRE(checked > 10);
}

TEST_CASE("verify evaluates path quantifiers innermost-first", "[model]") {
  FormulaTable t;

  SECTION("constant-p loop") {
    TransitionStructure m = single_state({"p"});
    REQUIRE(verify(m, 0, t, t.parse("p")).holds);
    REQUIRE(verify(m, 0, t, t.parse("A G p")).holds);
    REQUIRE_FALSE(verify(m, 0, t, t.parse("A F ~p")).holds);
    REQUIRE(verify(m, 0, t, t.parse("E X p")).holds);
  }

  SECTION("p / not-p two-cycle") {
    TransitionStructure m = two_cycle({"p"}, {});
    REQUIRE(verify(m, 0, t, t.parse("A G (p -> X ~p)")).holds);
    REQUIRE(verify(m, 0, t, t.parse("A F p")).holds);
    REQUIRE_FALSE(verify(m, 0, t, t.parse("A G p")).holds);
    REQUIRE(verify(m, 0, t, t.parse("E F G ~AXp")).holds ==
            verify(m, 0, t, t.parse("false")).holds);  // every state alternates
  }

  SECTION("branching: E and A diverge") {
    TransitionStructure m;
    m.num_states = 3;
    m.succ = {{1, 2}, {1}, {2}};
    m.atoms = {{}, {"p"}, {}};
    REQUIRE(verify(m, 0, t, t.parse("E X G p")).holds);
    REQUIRE_FALSE(verify(m, 0, t, t.parse("A X G p")).holds);
    REQUIRE(verify(m, 0, t, t.parse("A X (G p | G ~p)")).holds);
  }
}

TEST_CASE("verify agrees with the brute-force evaluator", "[model]") {
  std::mt19937_64 rng(777);
  for (int round = 0; round < 40; ++round) {
    FormulaTable t;
    FormulaId f = testgen::random_formula(t, rng, 8, 2, true);
    TransitionStructure m = random_structure(rng, 3);
    std::size_t s = rng() % m.num_states;
    CtlBrute brute(t, m, 8);
    INFO(t.render(f));
    REQUIRE(verify(m, s, t, f).holds == brute.exists_path(s, f));
  }
}

TEST_CASE("realizable_hues computes the actual hues", "[model]") {
  FormulaTable t;

  SECTION("single p state: one actual hue") {
    TransitionStructure m = single_state({"p"});
    ClosureSet cl(t, t.parse("p"));
    ActualHues ah = realizable_hues(m, cl);
    REQUIRE(ah.by_state.size() == 1);
    REQUIRE(ah.by_state[0].size() == 1);
    REQUIRE(render_set(cl, ah.universe[ah.by_state[0][0]]) == "{p}");
  }

  SECTION("eventuality hue on the p / not-p cycle") {
    TransitionStructure m = two_cycle({"p"}, {});
    ClosureSet cl(t, t.parse("F ~p"));
    ActualHues ah = realizable_hues(m, cl);
    // the pending-eventuality hue is actual at the p-state, the witnessing
    // hue at the other; the refuting hue is actual nowhere
    MemberSet pending = mk_set(cl, {"true", "F ~p", "p"});
    MemberSet witnessing = mk_set(cl, {"true", "F ~p", "~p"});
    MemberSet refuting = mk_set(cl, {"true", "~F ~p", "p"});
    auto at = [&](std::size_t s) {
      std::vector<MemberSet> out;
      for (std::size_t h : ah.by_state[s]) out.push_back(ah.universe[h]);
      return out;
    };
    REQUIRE(at(0) == std::vector<MemberSet>{pending});
    REQUIRE(at(1) == std::vector<MemberSet>{witnessing});
    (void)refuting;

    // brute cross-check: actual iff some bounded lasso realizes exactly it
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t h = 0; h < ah.universe.size(); ++h) {
        bool actual = std::find(ah.by_state[s].begin(), ah.by_state[s].end(),
                                h) != ah.by_state[s].end();
        bool brute = any_lasso(m, s, 4, [&](const Lasso& l) {
          LassoEval ev(t, lasso_letters(m, l), l.prefix.size());
          for (std::size_t mi = 0; mi < cl.size(); ++mi)
            if (ev.holds(cl.member(mi), 0) != ah.universe[h].test(mi))
              return false;
          return true;
        });
        REQUIRE(actual == brute);
      }
    }
  }

  SECTION("actual colours: non-empty, pass is_colour, chain by big_rx") {
    std::mt19937_64 rng(31337);
    for (int round = 0; round < 25; ++round) {
      FormulaTable tt;
      FormulaId f = testgen::random_formula(tt, rng, 7, 2, true);
      TransitionStructure m = random_structure(rng, 3);
      ClosureSet cl(tt, f);
      ActualHues ah = realizable_hues(m, cl);
      INFO(tt.render(f));
      std::vector<std::vector<MemberSet>> colours(m.num_states);
      for (std::size_t s = 0; s < m.num_states; ++s) {
        for (std::size_t h : ah.by_state[s])
          colours[s].push_back(ah.universe[h]);
        REQUIRE_FALSE(colours[s].empty());
        REQUIRE(is_colour(cl, colours[s]));
      }
      for (std::size_t s = 0; s < m.num_states; ++s)
        for (std::size_t s2 : m.succ[s])
          REQUIRE(big_rx(cl, colours[s], colours[s2]));
    }
  }

  SECTION("hue cap propagates as a resource error") {
    TransitionStructure m = single_state({"p"});
    ClosureSet cl(t, t.parse("a U (b U (c U d))"));
    REQUIRE_THROWS_AS(realizable_hues(m, cl, 2), ResourceError);
  }
}

TEST_CASE("oracle and verify meet on letter graphs", "[model]") {
  std::mt19937_64 rng(60902);
  int confirmed = 0;
  for (int round = 0; round < 40; ++round) {
    FormulaTable t;
    FormulaId f = testgen::random_formula(t, rng, 7, 2, false);
    bool oracle = ltl_sat_oracle(t, f);
    INFO(t.render(f));

    // any model path implies linear-time satisfiability
    TransitionStructure m = random_structure(rng, 3);
    if (verify(m, 0, t, f).holds) REQUIRE(oracle);

    // a satisfiable formula is realized on the letter graph of its witness
    if (oracle) {
      auto found = testoracle::find_bounded_lasso(t, f, 7);
      if (found) {
        std::size_t start = 0;
        TransitionStructure lg = letter_graph(found->first, found->second, start);
        REQUIRE(lg.is_total());
        REQUIRE(verify(lg, start, t, f).holds);
        ++confirmed;
      }
    }
  }
  REQUIRE(confirmed > 10);
}

TEST_CASE("extraction turns a leafless tableau into its structure") {
  FormulaTable t;
  // three nodes, four edges: a chain with two folds back to the root
  testutil::TableauBuilder b(t, "p & F q");
  auto n0 = b.add_root({{"p"}});
  auto n1 = b.add_child(n0, 0, {{"q"}, {"q"}});
  auto n2 = b.add_child(n1, 0, {{"p", "q"}});
  b.uplink(n1, 1, n0);
  b.uplink(n2, 0, n0);
  TransitionStructure m = extract(b.build());

  REQUIRE(m.num_states == 3);
  REQUIRE(m.succ[0] == std::vector<std::size_t>{1});
  REQUIRE(m.succ[1] == std::vector<std::size_t>{2, 0});
  REQUIRE(m.succ[2] == std::vector<std::size_t>{0});
  REQUIRE(m.atoms[0] == std::set<std::string>{"p"});
  REQUIRE(m.atoms[1] == std::set<std::string>{"q"});
  REQUIRE((m.atoms[2] == std::set<std::string>{"p", "q"}));
  REQUIRE(m.is_total());

  SECTION("atoms are unioned across phues of a node") {
    testutil::TableauBuilder c(t, "E p & q");
    auto m0 = c.add_root({{"p"}, {"q"}});
    c.uplink(m0, 0, m0);
    c.uplink(m0, 1, m0);
    TransitionStructure s = extract(c.build());
    REQUIRE((s.atoms[0] == std::set<std::string>{"p", "q"}));
    REQUIRE(s.succ[0] == std::vector<std::size_t>{0});  // deduplicated
  }
  SECTION("a remaining leaf is rejected") {
    testutil::TableauBuilder c(t, "X p");
    auto m0 = c.add_root({{"X p"}});
    c.add_child(m0, 0, {{"p"}});
    REQUIRE_THROWS_AS(extract(c.build()), std::logic_error);
  }
  SECTION("the tiny walkthrough certifies end to end") {
    FormulaId f = t.parse("p");
    Tableau tb(t, f);
    for (Rule want : {Rule::Nex, Rule::Loop})
      for (const RuleInstance& c : tb.enumerate_choices())
        if (c.rule == want) {
          tb.apply(c);
          break;
        }
    REQUIRE(tb.is_finished());
    TransitionStructure s = extract(tb);
    REQUIRE(s.num_states == 1);
    REQUIRE(verify(s, 0, t, f).holds);
  }
}
