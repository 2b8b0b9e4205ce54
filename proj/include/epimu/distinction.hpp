#pragma once

#include <string>
#include <vector>

#include "epimu/mas.hpp"

namespace epimu {

/// Surjective state/transition mapping pair between two systems over the same
/// atoms and agents. The transition map is induced: (q,r) -> (st(q), st(r)).
struct InSplitting {
  Mas src;
  Mas dst;
  std::vector<int> st_map;  // 1-based; st_map[q] = image of src state q

  int apply(int q) const { return st_map[q]; }
};

InSplitting identity_splitting(const Mas& m);

/// Checks all defining invariants: both maps surjective (the transition map
/// per source state, which is the reading all commutation properties need),
/// transitions land in dst, labels and out-degrees preserved, initial states
/// map onto initial states, same atoms/agents/observations on both sides.
std::vector<Violation> verify_in_splitting(const InSplitting& x);

/// Function composition: inner : A -> B applied first, outer : B -> C.
/// Throws input_error unless inner.dst == outer.src component-wise.
InSplitting compose(const InSplitting& outer, const InSplitting& inner);

/// { q in src | st_map(q) in S }.
StateSet preimage(const InSplitting& x, const StateSet& s_over_dst);

/// Image { st_map(q) | q in S }.
StateSet image(const InSplitting& x, const StateSet& s_over_src);

struct DistState {
  int base = 0;    // state of the source system
  StateSet info;   // set of source states with the same observation reachable
                   // along observation-equivalent runs
};

struct Distinction {
  Mas mas;                      // the distinguished system (reachable part)
  InSplitting chi;              // mas -> source, (q,S) -> q
  std::vector<DistState> meta;  // 1-based; meta[i] describes state i of mas
};

/// Subset-construction determinization for one agent. States are (q, S) pairs
/// discovered by BFS from the initial pairs (q0, {r in inits | same
/// observation as q0}) and densely renumbered in discovery order.
/// Throws budget_error when more than state_budget states appear.
Distinction a_distinction(const Mas& m, const std::string& a, long state_budget = 100000);

/// True iff the agent's reachability relation is an equivalence relation and
/// a congruence w.r.t. observation-matching transitions.
bool is_a_distinguished(const Mas& m, const std::string& a, long state_budget = 100000);

} // namespace epimu
