#pragma once

#include <map>
#include <string>

#include "epimu/formula.hpp"
#include "epimu/mas.hpp"
#include "epimu/state_set.hpp"

namespace epimu {

/// Binary relation on states for a fixed agent, stored as adjacency rows:
/// row[q] = { r | (q, r) in the relation }. (q, r) holds iff every run ending
/// in q has an observation-equivalent run ending in r.
struct GammaRel {
  int n = 0;
  std::vector<StateSet> row;  // 1-based

  bool holds(int q, int r) const { return row[q].contains(r); }
};

/// Exact relation via the subset construction: (q, r) holds iff r belongs to
/// the information set of every reachable determinization state over q.
GammaRel compute_gamma(const Mas& m, const std::string& a, long state_budget = 100000);

/// { q | every transition successor of q is in S }.
StateSet ax_f(const Mas& m, const StateSet& s);
/// { q | some transition successor of q is in S }.
StateSet ex_f(const Mas& m, const StateSet& s);
/// { q | exists s in S with (s, q) in the relation }.
StateSet pa_f(const GammaRel& g, const StateSet& s);
/// Dual of pa_f: complement(pa_f(complement S)).
StateSet ka_f(const GammaRel& g, const StateSet& s);

using VarEnv = std::map<std::string, StateSet>;

/// State-based semantics by structural recursion; least fixpoints iterate
/// from the empty set, greatest from the full set, both converging within
/// |Q| steps. Throws input_error on unbound variables or a missing relation.
StateSet eval_finitary(const Formula& f, const Mas& m, const VarEnv& env,
                       const std::map<std::string, GammaRel>& gammas);

/// Relations for every agent occurring in f.
std::map<std::string, GammaRel> compute_gammas(const Mas& m, const Formula& f,
                                               long state_budget = 100000);

} // namespace epimu
