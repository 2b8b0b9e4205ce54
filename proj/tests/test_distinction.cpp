#include <doctest.h>

#include <algorithm>

#include "epimu/distinction.hpp"
#include "epimu/errors.hpp"
#include "epimu/finitary.hpp"
#include "epimu/testgen.hpp"
#include "helpers.hpp"

using namespace epimu;

TEST_CASE("determinization of the running example, frozen") {
  Distinction d = a_distinction(fig1(), "a");
  REQUIRE(d.mas.n_states == 5);
  // discovery order: (1,{1}), (2,{2,3}), (3,{2,3}), (1,{1,3}), (3,{1,3})
  CHECK(d.meta[1].base == 1);
  CHECK(d.meta[1].info == StateSet::of(3, {1}));
  CHECK(d.meta[2].base == 2);
  CHECK(d.meta[2].info == StateSet::of(3, {2, 3}));
  CHECK(d.meta[3].base == 3);
  CHECK(d.meta[3].info == StateSet::of(3, {2, 3}));
  CHECK(d.meta[4].base == 1);
  CHECK(d.meta[4].info == StateSet::of(3, {1, 3}));
  CHECK(d.meta[5].base == 3);
  CHECK(d.meta[5].info == StateSet::of(3, {1, 3}));
  CHECK(d.mas.trans == std::vector<std::pair<int, int>>{
                           {1, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 2}, {4, 3}, {5, 3}});
  CHECK(d.mas.inits == std::vector<int>{1});
  CHECK(validate_mas(d.mas).empty());
  CHECK(verify_in_splitting(d.chi).empty());
  CHECK(is_a_distinguished(d.mas, "a"));
}

TEST_CASE("deterministic observation classes collapse to singleton info sets") {
  Mas m;
  m.n_states = 3;
  m.agents = {"a"};
  m.atoms = {"p", "q"};
  m.obs["a"] = {"p", "q"};
  m.labels = {{}, {"p"}, {"q"}, {"p", "q"}};
  m.trans = {{1, 2}, {2, 3}, {3, 1}};
  m.inits = {1};
  m.normalize();
  Distinction d = a_distinction(m, "a");
  CHECK(d.mas.n_states == 3);
  for (int i = 1; i <= 3; ++i) CHECK(d.meta[i].info.count() == 1);
}

TEST_CASE("distinguished test on the reference systems") {
  CHECK_FALSE(is_a_distinguished(fig1(), "a"));
  CHECK_FALSE(is_a_distinguished(fig2a(), "a"));

  Mas loop;
  loop.n_states = 1;
  loop.agents = {"a"};
  loop.atoms = {"p"};
  loop.obs["a"] = {"p"};
  loop.labels = {{}, {"p"}};
  loop.trans = {{1, 1}};
  loop.inits = {1};
  CHECK(is_a_distinguished(loop, "a"));
}

TEST_CASE("verify_in_splitting accepts the reference refinement") {
  InSplitting x;
  x.src = fig2a();
  x.dst = fig1();
  x.st_map = {0, 1, 2, 3, 3};
  CHECK(verify_in_splitting(x).empty());
  CHECK(verify_in_splitting(identity_splitting(fig1())).empty());
}

TEST_CASE("verify_in_splitting rejects broken mappings") {
  InSplitting x;
  x.src = fig2a();
  x.dst = fig1();
  x.st_map = {0, 1, 2, 3, 2};  // labels fine, but 4 -> 2 breaks transitions
  CHECK_FALSE(verify_in_splitting(x).empty());

  InSplitting y = identity_splitting(fig1());
  y.src.labels[2] = {};  // label preservation broken
  CHECK_FALSE(verify_in_splitting(y).empty());
}

TEST_CASE("composition laws") {
  Distinction d = a_distinction(fig1(), "a");
  InSplitting idm = identity_splitting(fig1());
  InSplitting idd = identity_splitting(d.mas);
  CHECK(compose(idm, d.chi).st_map == d.chi.st_map);
  CHECK(compose(d.chi, idd).st_map == d.chi.st_map);
  CHECK_THROWS_AS(compose(d.chi, d.chi), input_error);
}

TEST_CASE("stacked determinizations compose when observations nest") {
  Mas m = two_agents(true);  // obs(a) within obs(b)
  Distinction db = a_distinction(m, "b");
  Distinction da = a_distinction(db.mas, "a");
  InSplitting whole = compose(db.chi, da.chi);
  CHECK(verify_in_splitting(whole).empty());
  CHECK(is_a_distinguished(da.mas, "a"));
  CHECK(is_a_distinguished(da.mas, "b"));
}

TEST_CASE("preimage on the reference refinement") {
  InSplitting x;
  x.src = fig2a();
  x.dst = fig1();
  x.st_map = {0, 1, 2, 3, 3};
  CHECK(preimage(x, StateSet::of(3, {3})) == StateSet::of(4, {3, 4}));
  CHECK(preimage(x, StateSet(3)) == StateSet(4));
  CHECK(preimage(x, StateSet::full(3)) == StateSet::full(4));
}

TEST_CASE("image inverts preimage on surjective maps") {
  Rng rng(303);
  for (int trial = 0; trial < 30; ++trial) {
    Mas m = random_mas(rng);
    InSplitting x = random_split(rng, m);
    StateSet s(m.n_states);
    for (int q = 1; q <= m.n_states; ++q)
      if (rng() % 2) s.insert(q);
    CHECK(image(x, preimage(x, s)) == s);
    StateSet up(x.src.n_states);
    for (int q = 1; q <= x.src.n_states; ++q)
      if (rng() % 2) up.insert(q);
    CHECK(up.subset_of(preimage(x, image(x, up))));
  }
}

TEST_CASE("information-set equality is the relation on determinized systems") {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    Mas m = random_mas(rng);
    for (const auto& a : m.agents) {
      Distinction d = a_distinction(m, a);
      GammaRel g = compute_gamma(d.mas, a);
      for (int u = 1; u <= d.mas.n_states; ++u)
        for (int v = 1; v <= d.mas.n_states; ++v)
          CHECK(g.holds(u, v) == (d.meta[u].info == d.meta[v].info));
    }
  }
}

TEST_CASE("determinizing for a smaller observer preserves larger distinctions") {
  Rng rng(55);
  int premise_hits = 0;
  for (int trial = 0; trial < 120 && premise_hits < 25; ++trial) {
    Mas m = random_mas(rng);
    if (m.agents.size() < 2) continue;
    std::string a = m.agents[0], b = m.agents[1];
    const auto& oa = m.obs.at(a);
    const auto& ob = m.obs.at(b);
    if (!std::includes(ob.begin(), ob.end(), oa.begin(), oa.end())) continue;
    Mas base = a_distinction(m, b).mas;  // b-distinguished by construction
    REQUIRE(is_a_distinguished(base, b));
    ++premise_hits;
    Mas refined = a_distinction(base, a).mas;
    CHECK(is_a_distinguished(refined, b));
  }
  CHECK(premise_hits >= 25);
}

TEST_CASE("refinement preserves plain formula values through preimage") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    Mas m = random_mas(rng);
    InSplitting x = random_split(rng, m);
    Formula f = random_plain_formula(rng, m);
    StateSet dst_val = eval_finitary(f, x.dst, {}, {});
    StateSet src_val = eval_finitary(f, x.src, {}, {});
    CHECK(src_val == preimage(x, dst_val));
  }
}

TEST_CASE("determinization twice keeps the distinguished property and the values") {
  Mas m = fig1();
  Distinction d1 = a_distinction(m, "a");
  Distinction d2 = a_distinction(d1.mas, "a");
  CHECK(is_a_distinguished(d2.mas, "a"));
  for (const char* s : {"mu Z. p1 | EX Z", "nu Z. p1 & AX Z", "EX EX p1"}) {
    Formula f = parse_formula(s);
    StateSet v1 = eval_finitary(f, d1.mas, {}, {});
    StateSet v2 = eval_finitary(f, d2.mas, {}, {});
    CHECK(v2 == preimage(d2.chi, v1));
  }
}

TEST_CASE("state budget surfaces as a budget error") {
  CHECK_THROWS_AS(a_distinction(fig1(), "a", 2), budget_error);
}
