#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "epimu/distinction.hpp"
#include "epimu/finitary.hpp"
#include "epimu/formula.hpp"
#include "epimu/mas.hpp"
#include "epimu/syntree.hpp"

namespace epimu {

/// A system in the determinization chain. Every system is obtained from the
/// input model by a sequence of per-agent determinizations; recipe lists the
/// applied agents outermost-first, so recipe [a, b] reads "determinize for b,
/// then for a". States carry their grounding to an input-model state.
struct ChainSystem {
  Mas mas;
  int inner = -1;               // index of the system one determinization down
  std::string agent;            // determinization agent (when inner >= 0)
  std::vector<int> peel;        // state -> inner state; empty for the base
  std::vector<DistState> meta;  // per-state (base, info) over the inner system
  std::vector<int> ground;      // state -> input-model state
  std::map<int, int> init_of;   // input-model init -> init of this system
  std::vector<std::string> recipe;
};

/// Per-node in-splitting of the decision tree: a map from the node's domain
/// system onto its codomain system. Non-closed nodes and the root carry
/// identities; each closed node peels its parent region's determinization
/// tower and then applies a canonical base map.
struct NodeIns {
  int dom_sys = 0;
  int cod_sys = 0;
  std::vector<int> st_map;         // dom state -> cod state
  std::vector<std::string> tower;  // agents peeled at this node (subset-ordered)
};

struct InsTree {
  SynTree st;
  std::vector<ChainSystem> systems;  // systems[0] is the input model
  std::vector<NodeIns> node_ins;     // per syntactic-tree node
  std::vector<int> region_sys;       // per node: system its region lives over
  int root_sys = 0;

  const Mas& root_model() const { return systems[root_sys].mas; }

  /// Internal assertion suite: identities at root and non-closed nodes,
  /// domain/codomain chaining, equal root-to-leaf compositions, the
  /// tower-then-base shape of every closed node's map, and validity of
  /// every individual in-splitting.
  std::vector<Violation> verify() const;

  /// Composite state map along the path from the root to the node.
  std::vector<int> path_map(int node) const;
};

/// Builds the in-splitting tree bottom-up over the syntactic tree.
/// Precondition: f closed and non-mixing for m; throws input_error otherwise
/// and budget_error when a determinization exceeds the state budget.
InsTree build_ins_tree(const Formula& f, const Mas& m, long state_budget = 100000);

/// Preimage of a set over the node's codomain system along the composed
/// in-splitting from the root, i.e. the same property stated over the root
/// model.
StateSet pullback_result(const InsTree& t, int node, const StateSet& s);

struct CheckOptions {
  long state_budget = 100000;
  long node_budget = 1000000;
  int fuel = 16;
  int oracle_depth = 0;  // > 0: cross-check the verdict on the bounded unfolding
  bool witness_sets = false;
  bool trace_ins = false;
};

struct InsTraceEntry {
  std::string node_addr;
  std::string form;
  std::vector<std::string> tower;
  int dom_states = 0;
  int cod_states = 0;
};

struct WitnessEntry {
  std::string node_addr;
  std::string form;
  std::vector<int> states;  // over the root model, sorted
};

struct OracleCrossCheck {
  bool ran = false;
  bool agreed = true;
  int exact_depth = 0;
  std::string note;
};

struct CheckResult {
  std::map<int, bool> per_init;  // verdict per input-model initial state
  bool holds_all = false;
  bool holds_any = false;
  int root_model_size = 0;
  std::vector<int> root_set;  // satisfying states of the root model, sorted
  std::vector<InsTraceEntry> ins_trace;
  std::vector<WitnessEntry> witness_sets;
  OracleCrossCheck oracle;
};

/// Decides whether the unfolding of m satisfies the closed non-mixing
/// formula f, by bottom-up construction of state transformers over the
/// in-splitting tree. Deterministic: identical inputs give identical results
/// including state numbering.
CheckResult model_check(const Formula& f, const Mas& m, const CheckOptions& opts = {});

/// Exact tree semantics of a closed non-mixing formula at finite runs of m:
/// result[i] == true iff the unfolding node addressed by runs[i] satisfies f.
/// Each run is lifted along the grounding into the root model (the lift is
/// unique by out-degree preservation) and tested against the root set.
std::vector<bool> eval_closed_on_runs(const Formula& f, const Mas& m,
                                      const std::vector<Run>& runs,
                                      long state_budget = 100000);

} // namespace epimu
