#include <doctest.h>

#include <algorithm>

#include "epimu/errors.hpp"
#include "epimu/mas.hpp"
#include "helpers.hpp"

using namespace epimu;

namespace {
bool mentions(const std::vector<Violation>& vs, const std::string& frag) {
  for (const auto& v : vs)
    if (v.message.find(frag) != std::string::npos) return true;
  return false;
}
} // namespace

TEST_CASE("validate_mas accepts the running example") {
  CHECK(validate_mas(fig1()).empty());
  CHECK(validate_mas(fig2a()).empty());
}

TEST_CASE("validate_mas reports a missing successor") {
  Mas m = fig1();
  m.trans.erase(std::remove(m.trans.begin(), m.trans.end(), std::make_pair(3, 3)),
                m.trans.end());
  auto v = validate_mas(m);
  CHECK(mentions(v, "state 3 has no successor"));
}

TEST_CASE("validate_mas reports a bad initial state") {
  Mas m = fig1();
  m.inits = {4};
  auto v = validate_mas(m);
  CHECK(mentions(v, "initial state not in states"));
}

TEST_CASE("validate_mas reports unreachable states") {
  Mas m = fig1();
  m.n_states = 4;
  m.labels.push_back({"p1"});
  m.trans.emplace_back(4, 4);
  m.normalize();
  CHECK(mentions(validate_mas(m), "unreachable"));
}

TEST_CASE("obs_equiv on the running example") {
  Mas m = fig1();
  CHECK(obs_equiv(m, "a", {1, 2}, {1, 3}));
  CHECK(obs_equiv(m, "a", {1, 2, 1}, {1, 2, 1}));
  CHECK_FALSE(obs_equiv(m, "a", {1, 2}, {1, 2, 1}));
  CHECK_THROWS_AS(obs_equiv(m, "a", {2, 1}, {1, 2}), input_error);
}

TEST_CASE("obs_equiv distinguishes observations position-wise") {
  Mas m = two_agents(false);
  // agent a sees p: state 1 shows {p}, state 2 shows {}
  CHECK_FALSE(obs_equiv(m, "a", {1, 2}, {1, 1}));
  CHECK(obs_equiv(m, "b", {1, 1}, {1, 1}));
}

TEST_CASE("runs_up_to enumerates the unfolding prefix") {
  Mas m = fig1();
  auto r1 = runs_up_to(m, 1);
  REQUIRE(r1.size() == 1);
  CHECK(r1[0] == Run{1});

  auto r2 = runs_up_to(m, 2);
  REQUIRE(r2.size() == 3);
  CHECK(r2[1] == Run{1, 2});
  CHECK(r2[2] == Run{1, 3});

  auto r3 = runs_up_to(m, 3);
  REQUIRE(r3.size() == 5);
  CHECK(r3[3] == Run{1, 2, 1});
  CHECK(r3[4] == Run{1, 3, 3});
}

TEST_CASE("runs_up_to grows strictly with depth") {
  Mas m = fig2a();
  size_t prev = 0;
  for (int d = 1; d <= 6; ++d) {
    auto rs = runs_up_to(m, d);
    CHECK(rs.size() > prev);
    prev = rs.size();
  }
}

TEST_CASE("runs_up_to enforces the node budget") {
  CHECK_THROWS_AS(runs_up_to(fig1(), 30, 100), budget_error);
}

TEST_CASE("obs_equiv is an equivalence and refines along observation inclusion") {
  Mas m = two_agents(true);  // obs(a) within obs(b)
  auto runs = runs_up_to(m, 3);
  for (const auto& r1 : runs)
    for (const auto& r2 : runs) {
      if (r1.size() != r2.size()) continue;
      CHECK(obs_equiv(m, "a", r1, r1));
      CHECK(obs_equiv(m, "a", r1, r2) == obs_equiv(m, "a", r2, r1));
      if (obs_equiv(m, "b", r1, r2)) CHECK(obs_equiv(m, "a", r1, r2));
      for (const auto& r3 : runs) {
        if (r3.size() != r1.size()) continue;
        if (obs_equiv(m, "a", r1, r2) && obs_equiv(m, "a", r2, r3))
          CHECK(obs_equiv(m, "a", r1, r3));
      }
    }
}

TEST_CASE("model text format round-trips") {
  std::string text =
      "agents: a b\n"
      "atoms: p q\n"
      "obs a: p\n"
      "obs b: p q\n"
      "states: 3\n"
      "init: 1\n"
      "label 1: p\n"
      "label 2: p\n"
      "label 3:\n"
      "trans: 1->2 2->1 1->3 3->3\n";
  Mas m = parse_mas(text);
  CHECK(m.n_states == 3);
  CHECK(m.agents == std::vector<std::string>{"a", "b"});
  CHECK(m.obs["b"] == std::set<std::string>{"p", "q"});
  CHECK(m.labels[3].empty());
  CHECK(parse_mas(print_mas(m)) == m);
  CHECK(print_mas(parse_mas(print_mas(m))) == print_mas(m));
}

TEST_CASE("transition tokens parse with arbitrary spacing") {
  Mas a = parse_mas("states: 2\ninit: 1\ntrans: 1->2 2->1\n");
  Mas b = parse_mas("states: 2\ninit: 1\ntrans: 1 -> 2 2 ->1\n");
  Mas c = parse_mas("states: 2\ninit: 1\ntrans: 1-> 2\ntrans: 2 -> 1\n");
  CHECK(a.trans == b.trans);
  CHECK(a.trans == c.trans);
  CHECK_THROWS_AS(parse_mas("states: 2\ninit: 1\ntrans: 1->\n"), parse_error);
}

TEST_CASE("model parser reports malformed input with a line number") {
  CHECK_THROWS_AS(parse_mas("states: 2\ninit: 1\nlabel 5: p\n"), parse_error);
  CHECK_THROWS_AS(parse_mas("nonsense\n"), parse_error);
  CHECK_THROWS_AS(parse_mas("init: 1\n"), input_error);  // no states line
}
