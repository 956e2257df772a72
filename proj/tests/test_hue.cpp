// test_hue.cpp — hue predicate/enumeration, r_X / r_A / colours, threads,
// the product viability engine, and the linear-time satisfiability oracle.

#include <catch2/catch_amalgamated.hpp>
#include <ctlstar/hue.hpp>

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gen.hpp"
#include "lasso_oracle.hpp"
#include "util.hpp"

using namespace ctlstar;
using testoracle::bounded_lasso_sat;
using testutil::find_member;
using testutil::mk_set;

namespace {

std::set<std::string> as_strings(const ClosureSet& cl,
                                 const std::vector<MemberSet>& sets) {
  std::set<std::string> out;
  for (const MemberSet& s : sets) out.insert(render_set(cl, s));
  return out;
}

}  // namespace

TEST_CASE("is_hue accepts exactly the coherent MPC sets", "[hue]") {
  FormulaTable t;

  SECTION("closure of p") {
    ClosureSet cl(t, t.parse("p"));
    REQUIRE(is_hue(cl, mk_set(cl, {"p"})));
    REQUIRE(is_hue(cl, mk_set(cl, {"~p"})));
    REQUIRE_FALSE(is_hue(cl, cl.empty_set()));
  }

  SECTION("H2 violation over cl(p U q)") {
    ClosureSet cl(t, t.parse("p U q"));
    REQUIRE_FALSE(is_hue(cl, mk_set(cl, {"p U q", "~p", "~q"})));
    REQUIRE(is_hue(cl, mk_set(cl, {"p U q", "p", "~q"})));
  }

  SECTION("the 19-formula hue h38") {
    // Under core desugaring the listed formulas collapse to 11 members.
    ClosureSet cl(t, t.parse("~(AG(p -> EXp) -> (p -> EGp))"));
    MemberSet h38 = mk_set(
        cl, {"AG(p -> EXp) & ~(p -> EGp)", "AG(p -> EXp)", "G(p -> EXp)",
             "true", "p -> EXp", "p", "EXp", "Xp", "p & ~EGp", "~EGp", "F~p"});
    REQUIRE(h38.count() == 11);
    REQUIRE(is_hue(cl, h38));
  }

  SECTION("no hue contains the false member") {
    ClosureSet cl(t, t.parse("false"));
    for (const MemberSet& h : enumerate_hues(cl)) REQUIRE(!h.test(cl.root_index()));
    ClosureSet cl2(t, t.parse("p & false"));
    for (const MemberSet& h : enumerate_hues(cl2))
      REQUIRE(h.test(*cl2.true_index()));
  }
}

TEST_CASE("enumerate_hues", "[hue]") {
  FormulaTable t;

  SECTION("cl(p) has the two obvious hues, deterministically ordered") {
    ClosureSet cl(t, t.parse("p"));
    auto hues = enumerate_hues(cl);
    REQUIRE(hues.size() == 2);
    REQUIRE(render_set(cl, hues[0]) == "{p}");
    REQUIRE(render_set(cl, hues[1]) == "{~p}");
  }

  SECTION("cl(p U q) has exactly five hues") {
    ClosureSet cl(t, t.parse("p U q"));
    auto hues = enumerate_hues(cl);
    REQUIRE(hues.size() == 5);
    REQUIRE(as_strings(cl, hues) ==
            std::set<std::string>{
                "{p U q, p, q}", "{p U q, p, ~q}", "{p U q, ~p, q}",
                "{~(p U q), p, ~q}", "{~(p U q), ~p, ~q}"});
  }

  SECTION("agrees with full subset filtering for small closures") {
    std::mt19937_64 rng(11);
    int done = 0;
    while (done < 40) {
      FormulaId f = testgen::random_formula(t, rng, 8, 2, true);
      ClosureSet cl(t, f);
      if (cl.size() > 12) continue;
      ++done;
      INFO(t.render(f));
      std::set<std::string> brute;
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << cl.size()); ++m) {
        MemberSet s(cl.size(), m);
        if (is_hue(cl, s)) brute.insert(render_set(cl, s));
      }
      auto hues = enumerate_hues(cl);
      REQUIRE(as_strings(cl, hues) == brute);
      REQUIRE(hues.size() <= (std::size_t{1} << t.node_count(f)));
      for (const MemberSet& h : hues) REQUIRE(is_hue(cl, h));
    }
  }

  SECTION("pair cap raises a resource error") {
    ClosureSet cl(t, t.parse("a U (b U (c U (d U e)))"));
    REQUIRE(cl.pair_count() > 3);
    REQUIRE_THROWS_AS(enumerate_hues(cl, 3), ResourceError);
  }
}

TEST_CASE("rx follows R1-R4 literally", "[hue]") {
  FormulaTable t;

  SECTION("R1: Xp forces p in the successor") {
    ClosureSet cl(t, t.parse("Xp"));
    REQUIRE_FALSE(rx(cl, mk_set(cl, {"Xp", "p"}), mk_set(cl, {"Xp", "~p"})));
    REQUIRE(rx(cl, mk_set(cl, {"Xp", "p"}), mk_set(cl, {"~Xp", "p"})));
  }

  SECTION("R2: ~Xp forces ~p in the successor") {
    ClosureSet cl(t, t.parse("Xp"));
    REQUIRE_FALSE(rx(cl, mk_set(cl, {"~Xp", "p"}), mk_set(cl, {"~Xp", "p"})));
    REQUIRE(rx(cl, mk_set(cl, {"~Xp", "p"}), mk_set(cl, {"Xp", "~p"})));
  }

  SECTION("R3: a pending until is carried forward") {
    ClosureSet cl(t, t.parse("p U q"));
    MemberSet a = mk_set(cl, {"p U q", "p", "~q"});
    REQUIRE_FALSE(rx(cl, a, mk_set(cl, {"~(p U q)", "p", "~q"})));
    REQUIRE(rx(cl, a, mk_set(cl, {"p U q", "~p", "q"})));
    // literal reading: without the ~q member the until is not carried
    REQUIRE(rx(cl, mk_set(cl, {"p U q"}), cl.empty_set()));
  }

  SECTION("R4: a refuted until is carried while its lhs holds") {
    ClosureSet cl(t, t.parse("p U q"));
    MemberSet a = mk_set(cl, {"~(p U q)", "p", "~q"});
    REQUIRE_FALSE(rx(cl, a, mk_set(cl, {"p U q", "p", "q"})));
    REQUIRE(rx(cl, a, mk_set(cl, {"~(p U q)", "~p", "~q"})));
    MemberSet no_lhs = mk_set(cl, {"~(p U q)", "~p", "~q"});
    REQUIRE(rx(cl, no_lhs, mk_set(cl, {"p U q", "p", "q"})));
  }

  SECTION("no X or U members makes rx vacuous") {
    ClosureSet cl(t, t.parse("p"));
    for (const MemberSet& a : enumerate_hues(cl))
      for (const MemberSet& b : enumerate_hues(cl)) REQUIRE(rx(cl, a, b));
  }
}

TEST_CASE("ra is an equivalence keyed on atoms and A-members", "[hue]") {
  FormulaTable t;
  ClosureSet cl(t, t.parse("p U q"));
  auto hues = enumerate_hues(cl);

  SECTION("reflexive, symmetric, transitive on the hue universe") {
    for (const auto& a : hues) REQUIRE(ra(cl, a, a));
    for (const auto& a : hues)
      for (const auto& b : hues) REQUIRE(ra(cl, a, b) == ra(cl, b, a));
    for (const auto& a : hues)
      for (const auto& b : hues)
        for (const auto& c : hues)
          if (ra(cl, a, b) && ra(cl, b, c)) REQUIRE(ra(cl, a, c));
  }

  SECTION("hues differing only in an until member are related") {
    REQUIRE(ra(cl, mk_set(cl, {"p U q", "p", "~q"}),
               mk_set(cl, {"~(p U q)", "p", "~q"})));
  }

  SECTION("atom disagreement breaks ra") {
    REQUIRE_FALSE(ra(cl, mk_set(cl, {"p U q", "p", "q"}),
                     mk_set(cl, {"p U q", "~p", "q"})));
  }
}

TEST_CASE("colours: C1 and C2 over the h37/h38 closure", "[hue]") {
  FormulaTable t;
  ClosureSet cl(t, t.parse("~(AG(p -> EXp) -> (p -> EGp))"));
  MemberSet h38 = mk_set(
      cl, {"AG(p -> EXp) & ~(p -> EGp)", "AG(p -> EXp)", "G(p -> EXp)", "true",
           "p -> EXp", "p", "EXp", "Xp", "p & ~EGp", "~EGp", "F~p"});
  REQUIRE(is_hue(cl, h38));

  SECTION("h37 reconstructed: holds ~Xp and EXp, completes h38 to a colour") {
    auto hues = enumerate_hues(cl);
    std::size_t nxp = find_member(cl, "~Xp");
    std::size_t exp = find_member(cl, "EXp");
    std::size_t found = 0, colour_with_h38 = 0;
    for (const MemberSet& h : hues) {
      if (!h.test(nxp) || !h.test(exp) || !ra(cl, h, h38)) continue;
      ++found;
      REQUIRE_FALSE(is_colour(cl, {h}));  // EXp has no Xp witness inside
      if (is_colour(cl, {h, h38})) ++colour_with_h38;
    }
    REQUIRE(found >= 1);
    REQUIRE(colour_with_h38 >= 1);
  }

  SECTION("trivial colour cases") {
    ClosureSet clu(t, t.parse("p U q"));
    for (const MemberSet& h : enumerate_hues(clu))
      REQUIRE(is_colour(clu, {h}));  // no ~A members anywhere
    REQUIRE_FALSE(is_colour(clu, {}));
  }
}

TEST_CASE("big_rx lifts rx to colours", "[hue]") {
  FormulaTable t;

  SECTION("vacuous when hues impose nothing") {
    ClosureSet cl(t, t.parse("p"));
    std::vector<MemberSet> c = {mk_set(cl, {"p"})};
    REQUIRE(big_rx(cl, c, c));
  }

  SECTION("a successor hue without predecessor fails") {
    ClosureSet cl(t, t.parse("Xp"));
    std::vector<MemberSet> c = {mk_set(cl, {"Xp", "p"})};
    std::vector<MemberSet> d = {mk_set(cl, {"Xp", "~p"})};
    REQUIRE_FALSE(big_rx(cl, c, d));
    REQUIRE(big_rx(cl, c, {mk_set(cl, {"~Xp", "p"})}));
  }
}

TEST_CASE("hue threads: rx chaining and fulfillment", "[hue]") {
  FormulaTable t;
  ClosureSet cl(t, t.parse("p U q"));
  MemberSet pending = mk_set(cl, {"p U q", "p", "~q"});
  MemberSet witness = mk_set(cl, {"p U q", "~p", "q"});
  MemberSet closed = mk_set(cl, {"~(p U q)", "~p", "~q"});

  SECTION("a pending-then-witness lasso is accepted") {
    HueThread th{{pending}, {witness}};
    REQUIRE(thread_respects_rx(cl, th));
    REQUIRE(thread_fulfilling(cl, th));
  }

  SECTION("a forever-pending loop is not fulfilling") {
    HueThread th{{}, {pending}};
    REQUIRE(thread_respects_rx(cl, th));
    REQUIRE_FALSE(thread_fulfilling(cl, th));
  }

  SECTION("rx violations are caught, including the wrap edge") {
    HueThread th{{pending}, {closed}};
    REQUIRE_FALSE(thread_respects_rx(cl, th));  // R3 into the loop head
    HueThread th2{{}, {pending, closed}};
    REQUIRE_FALSE(thread_respects_rx(cl, th2));
  }

  SECTION("loop witnesses serve earlier loop positions") {
    // q appears before the pending position inside the loop; cyclically fine.
    HueThread th{{}, {witness, pending}};
    REQUIRE(thread_respects_rx(cl, th));
    REQUIRE(thread_fulfilling(cl, th));
  }
}

TEST_CASE("product viability and witnesses", "[hue]") {
  FormulaTable t;
  ClosureSet cl(t, t.parse("p U q"));
  auto hues = enumerate_hues(cl);
  auto idx_of = [&](const MemberSet& h) {
    for (std::size_t i = 0; i < hues.size(); ++i)
      if (hues[i] == h) return i;
    throw std::runtime_error("hue not in universe");
  };
  std::size_t pending = idx_of(mk_set(cl, {"p U q", "p", "~q"}));
  std::size_t witness = idx_of(mk_set(cl, {"p U q", "~p", "q"}));

  SECTION("a reachable witness makes the pending pair viable") {
    ProductSpec spec;
    spec.num_states = 2;
    spec.succ = {{1}, {1}};
    spec.admissible = {{pending}, {witness}};
    ViableProduct vp(cl, hues, spec);
    REQUIRE(vp.viable(0, pending));
    auto w = vp.witness(0, pending);
    REQUIRE(w.has_value());
    REQUIRE(w->prefix.size() + w->loop.size() >= 2);
    HueThread th = to_hue_thread(hues, *w);
    REQUIRE(thread_respects_rx(cl, th));
    REQUIRE(thread_fulfilling(cl, th));
  }

  SECTION("an unreachable witness kills the pending pair") {
    ProductSpec spec;
    spec.num_states = 2;
    spec.succ = {{1}, {1}};
    spec.admissible = {{pending}, {pending}};
    ViableProduct vp(cl, hues, spec);
    REQUIRE_FALSE(vp.viable(0, pending));
    REQUIRE_FALSE(vp.witness(0, pending).has_value());
  }

  SECTION("dead ends: forgiven only when the spec says so") {
    ProductSpec spec;
    spec.num_states = 2;
    spec.succ = {{1}, {}};
    spec.admissible = {{pending}, {pending}};
    spec.dead_end_viable = false;
    REQUIRE_FALSE(ViableProduct(cl, hues, spec).viable(0, pending));
    spec.dead_end_viable = true;
    REQUIRE(ViableProduct(cl, hues, spec).viable(0, pending));
  }

  SECTION("witness sanity on random products") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 60; ++round) {
      FormulaTable tt;
      FormulaId f = testgen::random_formula(tt, rng, 7, 2, false);
      ClosureSet cc(tt, f);
      if (cc.pair_count() > 8) continue;
      auto universe = enumerate_hues(cc);
      if (universe.empty()) continue;
      ProductSpec spec;
      spec.num_states = 1 + rng() % 3;
      spec.succ.resize(spec.num_states);
      spec.admissible.resize(spec.num_states);
      for (std::size_t s = 0; s < spec.num_states; ++s) {
        for (std::size_t s2 = 0; s2 < spec.num_states; ++s2)
          if (rng() % 2) spec.succ[s].push_back(s2);
        for (std::size_t h = 0; h < universe.size(); ++h)
          if (rng() % 3 == 0) spec.admissible[s].push_back(h);
      }
      ViableProduct vp(cc, universe, spec);
      for (std::size_t s = 0; s < spec.num_states; ++s) {
        for (std::size_t h : spec.admissible[s]) {
          auto w = vp.witness(s, h);
          REQUIRE(w.has_value() == vp.viable(s, h));
          if (!w) continue;
          HueThread th = to_hue_thread(universe, *w);
          REQUIRE(thread_respects_rx(cc, th));
          REQUIRE(thread_fulfilling(cc, th));
          REQUIRE_FALSE(w->loop.empty());
          // the thread starts at the queried pair and follows succ
          auto flat = w->prefix;
          flat.insert(flat.end(), w->loop.begin(), w->loop.end());
          REQUIRE(flat.front().first == s);
          REQUIRE(flat.front().second == h);
          for (std::size_t i = 0; i + 1 < flat.size(); ++i) {
            const auto& nx = spec.succ[flat[i].first];
            REQUIRE(std::find(nx.begin(), nx.end(), flat[i + 1].first) !=
                    nx.end());
          }
          const auto& wrap = spec.succ[flat.back().first];
          REQUIRE(std::find(wrap.begin(), wrap.end(),
                            w->loop.front().first) != wrap.end());
        }
      }
    }
  }
}

TEST_CASE("linear-time satisfiability oracle", "[hue]") {
  FormulaTable t;

  SECTION("fixed verdicts") {
    REQUIRE_FALSE(ltl_sat_oracle(t, t.parse("p & ~p")));
    REQUIRE(ltl_sat_oracle(t, t.parse("G p")));
    REQUIRE_FALSE(ltl_sat_oracle(t, t.parse("(p U q) & G~q")));
    REQUIRE(ltl_sat_oracle(t, t.parse("p U q")));
    REQUIRE(ltl_sat_oracle(t, t.parse("true")));
    REQUIRE_FALSE(ltl_sat_oracle(t, t.parse("false")));
    REQUIRE(ltl_sat_oracle(t, t.parse("F p & F ~p")));
    REQUIRE_FALSE(ltl_sat_oracle(t, t.parse("F G p & G F ~p")));
  }

  SECTION("rejects path-quantified input") {
    REQUIRE_THROWS_AS(ltl_sat_oracle(t, t.parse("A p")), std::invalid_argument);
  }

  SECTION("bounded-lasso witnesses are never contradicted") {
    std::mt19937_64 rng(314159);
    int lasso_sat_count = 0;
    for (int i = 0; i < 120; ++i) {
      FormulaTable tt;
      FormulaId f = testgen::random_formula(tt, rng, 8, 2, false);
      bool oracle = ltl_sat_oracle(tt, f);
      bool small_witness = bounded_lasso_sat(tt, f, 6);
      INFO(tt.render(f));
      if (small_witness) {
        ++lasso_sat_count;
        REQUIRE(oracle);
      }
    }
    REQUIRE(lasso_sat_count > 40);  // the cross-check must not be vacuous
  }
}
