#pragma once

#include "epimu/mas.hpp"

// The two running examples: a one-agent three-state system whose agent
// observes the single atom everywhere, and its four-state refinement that
// splits the looping state in two.
inline epimu::Mas fig1() {
  epimu::Mas m;
  m.n_states = 3;
  m.agents = {"a"};
  m.atoms = {"p1"};
  m.obs["a"] = {"p1"};
  m.labels = {{}, {"p1"}, {"p1"}, {"p1"}};
  m.trans = {{1, 2}, {2, 1}, {1, 3}, {3, 3}};
  m.inits = {1};
  m.normalize();
  return m;
}

inline epimu::Mas fig2a() {
  epimu::Mas m;
  m.n_states = 4;
  m.agents = {"a"};
  m.atoms = {"p1"};
  m.obs["a"] = {"p1"};
  m.labels = {{}, {"p1"}, {"p1"}, {"p1"}, {"p1"}};
  m.trans = {{1, 2}, {2, 1}, {1, 3}, {3, 4}, {4, 4}};
  m.inits = {1};
  m.normalize();
  return m;
}

// Two agents over two atoms; comparable variant has obs(a) within obs(b).
inline epimu::Mas two_agents(bool comparable) {
  epimu::Mas m;
  m.n_states = 2;
  m.agents = {"a", "b"};
  m.atoms = {"p", "q"};
  m.obs["a"] = {"p"};
  m.obs["b"] = comparable ? std::set<std::string>{"p", "q"} : std::set<std::string>{"q"};
  m.labels = {{}, {"p"}, {"q"}};
  m.trans = {{1, 2}, {2, 1}, {1, 1}, {2, 2}};
  m.inits = {1};
  m.normalize();
  return m;
}
