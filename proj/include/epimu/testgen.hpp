#pragma once

#include <random>

#include "epimu/distinction.hpp"
#include "epimu/formula.hpp"
#include "epimu/mas.hpp"

namespace epimu {

using Rng = std::mt19937_64;

struct MasGenSpec {
  int max_states = 6;
  int max_atoms = 3;
  int min_agents = 1;
  int max_agents = 2;
  double trans_density = 0.35;  // extra edges beyond the totality spine
};

/// Random valid system: total transition relation, all states reachable from
/// the initial states (unreachable states are dropped and the rest densely
/// renumbered). Deterministic for a given generator state.
Mas random_mas(Rng& rng, const MasGenSpec& spec = {});

struct FormulaGenSpec {
  int max_depth = 3;
  bool allow_fixpoints = true;
};

/// Random closed plain formula over the atoms of m.
Formula random_plain_formula(Rng& rng, const Mas& m, const FormulaGenSpec& spec = {});

/// Random in-splitting produced by splitting one state of m into two along a
/// partition of its incoming edges (out-edges are copied). Requires a state
/// with at least two incoming edge sources or an initial in-edge; returns an
/// identity when none exists.
InSplitting random_split(Rng& rng, const Mas& m);

} // namespace epimu
