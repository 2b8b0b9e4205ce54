#include <doctest.h>

#include <algorithm>

#include "epimu/errors.hpp"
#include "epimu/oracle.hpp"
#include "epimu/testgen.hpp"
#include "helpers.hpp"

using namespace epimu;

namespace {
StateSet nodes_matching(const BoundedTree& bt, int end_state, int level_parity /* -1 any */) {
  StateSet s(bt.node_count());
  for (int u = 1; u <= bt.node_count(); ++u) {
    if (bt.state_of(u) != end_state) continue;
    if (level_parity >= 0 && bt.level_of(u) % 2 != level_parity) continue;
    s.insert(u);
  }
  return s;
}
} // namespace

TEST_CASE("bounded tree structure of the running example") {
  BoundedTree bt(fig1(), 3);
  CHECK(bt.node_count() == 5);
  CHECK(bt.nodes_at_level(1).size() == 1);
  CHECK(bt.nodes_at_level(2).size() == 2);
  CHECK(bt.nodes_at_level(3).size() == 2);
  CHECK(bt.run_of(bt.node_of({1, 2, 1})) == Run{1, 2, 1});
  CHECK(bt.node_of({1, 1}) == -1);
}

TEST_CASE("atoms evaluate on endpoints with full exactness") {
  BoundedTree bt(fig1(), 3);
  TreeEvalResult r = tree_eval_bounded(parse_formula("p1"), bt, {}, 8);
  CHECK(r.set == StateSet::full(5));
  CHECK(r.exact_depth == 3);
}

TEST_CASE("next-step operators shrink the exactness guard") {
  BoundedTree bt(fig1(), 5);
  TreeEvalResult r = tree_eval_bounded(parse_formula("EX EX p1"), bt, {}, 8);
  CHECK(r.exact_depth == 3);
}

TEST_CASE("possibility over a node set follows the level parity of the example") {
  Mas m = fig1();
  BoundedTree bt(m, 4);
  NodeEnv env{{"W", nodes_matching(bt, 2, -1)}};
  TreeEvalResult r = tree_eval_bounded(f_poss("a", f_var("W")), bt, env, 8);
  // nodes ending in 2, plus nodes ending in 3 at even levels
  StateSet expect = nodes_matching(bt, 2, -1) | nodes_matching(bt, 3, 0);
  CHECK(r.set == expect);
  CHECK(r.exact_depth == 4);  // epistemic steps cost nothing
}

TEST_CASE("plain diagram commutes on the running example") {
  for (const char* s : {"mu Z. p1 | EX Z", "nu Z. p1 & AX Z"}) {
    DiagramReport rep = check_plain_diagram(parse_formula(s), fig1(), 5, 16);
    CHECK(rep.mismatches.empty());
    CHECK(rep.nodes_checked > 0);
  }
}

TEST_CASE("plain diagram holds on random systems and formulas") {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    Mas m = random_mas(rng, {4, 3, 1, 2, 0.3});
    Formula f = random_plain_formula(rng, m, {2, true});
    DiagramReport rep = check_plain_diagram(f, m, 6, 32);
    CHECK(rep.mismatches.empty());
  }
}

TEST_CASE("epistemic diagram fails on the running example exactly at odd levels") {
  Mas m = fig1();
  EpistemicDiagramReport rep = check_epistemic_diagram(m, "a", StateSet::of(3, {1, 3}), 4);
  // know-side mismatches: endpoints 3 at odd levels; here only 1·3·3
  REQUIRE(rep.know_mismatches.size() == 1);
  CHECK(rep.know_mismatches[0].run == Run{1, 3, 3});
  CHECK_FALSE(rep.know_mismatches[0].finitary_member);
  CHECK(rep.know_mismatches[0].tree_member);
}

TEST_CASE("epistemic diagram commutes after determinization") {
  Mas dm = a_distinction(fig1(), "a").mas;
  for (auto s : {StateSet::of(5, {1, 4}), StateSet::of(5, {2, 3}), StateSet(5),
                 StateSet::full(5)}) {
    EpistemicDiagramReport rep = check_epistemic_diagram(dm, "a", s, 4);
    CHECK(rep.know_mismatches.empty());
    CHECK(rep.poss_mismatches.empty());
  }
}

TEST_CASE("epistemic diagram commutes on distinguished systems, any set") {
  Rng rng(409);
  for (int trial = 0; trial < 12; ++trial) {
    Mas m = random_mas(rng, {4, 2, 1, 1, 0.3});
    const std::string a = m.agents[0];
    Mas dm = a_distinction(m, a).mas;
    REQUIRE(is_a_distinguished(dm, a));
    for (int k = 0; k < 5; ++k) {
      StateSet s(dm.n_states);
      for (int q = 1; q <= dm.n_states; ++q)
        if (rng() % 2) s.insert(q);
      EpistemicDiagramReport rep = check_epistemic_diagram(dm, a, s, 4, 200000);
      CHECK(rep.know_mismatches.empty());
      CHECK(rep.poss_mismatches.empty());
    }
  }
}

TEST_CASE("the non-distinguished witness already fails at depth 2") {
  EpistemicDiagramReport rep =
      check_epistemic_diagram(fig1(), "a", StateSet::of(3, {1, 3}), 2);
  CHECK(rep.know_mismatches.size() + rep.poss_mismatches.size() > 0);
}

TEST_CASE("epistemic diagram on the split system flags endpoint 4 at even levels") {
  Mas m = fig2a();
  EpistemicDiagramReport rep = check_epistemic_diagram(m, "a", StateSet::of(4, {1, 4}), 5);
  std::vector<Run> runs;
  for (const auto& mm : rep.know_mismatches) runs.push_back(mm.run);
  CHECK(runs == std::vector<Run>{{1, 3, 4, 4}});
}

TEST_CASE("knowledge and possibility are dual level-wise") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    Mas m = random_mas(rng, {4, 2, 1, 1, 0.3});
    BoundedTree bt(m, 4);
    StateSet s(bt.node_count());
    for (int u = 1; u <= bt.node_count(); ++u)
      if (rng() % 2) s.insert(u);
    NodeEnv env{{"Z", s}};
    NodeEnv envc{{"Z", s.complement()}};
    const std::string a = m.agents[0];
    StateSet know = tree_eval_bounded(f_know(a, f_var("Z")), bt, env, 4).set;
    StateSet poss_c = tree_eval_bounded(f_poss(a, f_var("Z")), bt, envc, 4).set;
    CHECK(know == poss_c.complement());
  }
}

TEST_CASE("observation classes refine when the observer sees more") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Mas m = random_mas(rng, {4, 3, 2, 2, 0.3});
    const auto& oa = m.obs.at(m.agents[0]);
    const auto& ob = m.obs.at(m.agents[1]);
    if (!std::includes(ob.begin(), ob.end(), oa.begin(), oa.end())) continue;
    BoundedTree bt(m, 4);
    for (int u = 1; u <= bt.node_count(); ++u)
      for (int v = 1; v <= bt.node_count(); ++v) {
        if (bt.level_of(u) != bt.level_of(v)) continue;
        if (bt.class_of(m.agents[1], u) == bt.class_of(m.agents[1], v))
          CHECK(bt.class_of(m.agents[0], u) == bt.class_of(m.agents[0], v));
      }
  }
}

TEST_CASE("iso invariance under state renaming") {
  Mas m = fig1();
  // rename states by the permutation 1->2->3->1
  Mas r;
  r.n_states = 3;
  r.agents = m.agents;
  r.atoms = m.atoms;
  r.obs = m.obs;
  r.labels = {{}, {"p1"}, {"p1"}, {"p1"}};
  r.trans = {{2, 3}, {3, 2}, {2, 1}, {1, 1}};
  r.inits = {2};
  r.normalize();
  InSplitting iso;
  iso.src = m;
  iso.dst = r;
  iso.st_map = {0, 2, 3, 1};
  REQUIRE(verify_in_splitting(iso).empty());
  for (const char* s : {"mu Z. p1 | EX Z", "EX EX p1", "K[a] p1"}) {
    IsoReport rep = check_iso_invariance(m, r, iso, parse_formula(s), 4, 16);
    CHECK(rep.mismatches.empty());
  }
  IsoReport rep = check_iso_invariance(m, m, identity_splitting(m),
                                       parse_formula("nu Z. p1 & AX Z"), 4, 16);
  CHECK(rep.mismatches.empty());
}

TEST_CASE("non-bijective mappings are rejected for iso checks") {
  InSplitting x;
  x.src = fig2a();
  x.dst = fig1();
  x.st_map = {0, 1, 2, 3, 3};
  CHECK_THROWS_AS(check_iso_invariance(fig2a(), fig1(), x, parse_formula("p1"), 3, 8),
                  input_error);
}

TEST_CASE("induced node map commutes with endpoint labels") {
  Rng rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    Mas m = random_mas(rng);
    InSplitting x = random_split(rng, m);
    BoundedTree b1(x.src, 4);
    BoundedTree b2(x.dst, 4);
    CHECK(b1.node_count() == b2.node_count());  // hat-map is a bijection
    for (int u = 1; u <= b1.node_count(); ++u) {
      Run r1 = b1.run_of(u);
      Run r2;
      for (int q : r1) r2.push_back(x.st_map[q]);
      int v = b2.node_of(r2);
      REQUIRE(v > 0);
      CHECK(x.dst.labels[b2.state_of(v)] == x.src.labels[b1.state_of(u)]);
    }
  }
}

TEST_CASE("fuel exhaustion is a budget error") {
  // this least fixpoint climbs one level per approximant
  BoundedTree bt(fig1(), 6);
  CHECK_THROWS_AS(tree_eval_bounded(parse_formula("mu Z. AX Z"), bt, {}, 2), budget_error);
  CHECK(tree_eval_bounded(parse_formula("mu Z. AX Z"), bt, {}, 16).set ==
        StateSet::full(bt.node_count()));
}
