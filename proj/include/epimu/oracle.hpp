#pragma once

#include <map>
#include <string>
#include <vector>

#include "epimu/distinction.hpp"
#include "epimu/finitary.hpp"
#include "epimu/formula.hpp"
#include "epimu/mas.hpp"

namespace epimu {

/// All unfolding nodes of a system up to a fixed depth, with per-agent
/// observation-equivalence classes. Levels count run length: the root nodes
/// are at level 1 and equivalence never crosses levels.
class BoundedTree {
public:
  BoundedTree(const Mas& m, int depth, long node_cap = 1000000);

  const Mas& mas() const { return *m_; }
  int depth() const { return depth_; }
  int node_count() const { return (int)state_.size() - 1; }

  int state_of(int node) const { return state_[node]; }
  int level_of(int node) const { return level_[node]; }
  int parent_of(int node) const { return parent_[node]; }
  const std::vector<int>& children_of(int node) const { return children_[node]; }
  const std::vector<int>& nodes_at_level(int l) const { return by_level_[l]; }
  Run run_of(int node) const;
  /// Node id of a run, or -1.
  int node_of(const Run& r) const;

  /// Class id of a node under agent a; equal ids <=> observation-equivalent.
  int class_of(const std::string& a, int node) const;

  /// Nodes whose endpoint lies in the state set.
  StateSet lift(const StateSet& states) const;

private:
  void ensure_agent(const std::string& a) const;

  const Mas* m_;
  MasIndex idx_;
  int depth_;
  std::vector<int> state_, level_, parent_;  // 1-based nodes
  std::vector<std::vector<int>> children_;
  std::vector<std::vector<int>> by_level_;
  mutable std::map<std::string, std::vector<int>> class_;  // computed on first use
};

using NodeEnv = std::map<std::string, StateSet>;  // variable -> node set

struct TreeEvalResult {
  StateSet set;        // node set (over the bounded tree)
  int exact_depth;     // levels 1..exact_depth are exact w.r.t. the full tree
  int modal_cost;      // accumulated AX/EX steps and fixpoint unrollings
};

/// Fixpoints are evaluated as Kleene approximants; each performed iteration
/// adds its body's modal cost to the exactness guard (conservative). Epistemic
/// operators quantify over full levels and cost nothing. Throws budget_error
/// when a fixpoint fails to stabilize within fuel iterations.
TreeEvalResult tree_eval_bounded(const Formula& f, const BoundedTree& bt,
                                 const NodeEnv& env, int fuel);

struct Mismatch {
  int node;
  Run run;
  bool finitary_member;
  bool tree_member;
};

struct DiagramReport {
  std::vector<Mismatch> mismatches;
  int exact_depth = 0;
  int nodes_checked = 0;
};

/// Compares the state-based and tree-based values of a closed plain formula
/// on all nodes within the exactness guard. Zero mismatches expected always.
DiagramReport check_plain_diagram(const Formula& f, const Mas& m, int depth, int fuel,
                                  long state_budget = 100000, long node_cap = 1000000);

struct EpistemicDiagramReport {
  std::vector<Mismatch> know_mismatches;  // K-variant
  std::vector<Mismatch> poss_mismatches;  // P-variant
  int depth = 0;
};

/// Compares lifted finitary knowledge of S with tree knowledge of the lifted
/// S, both variants, on all nodes up to the given depth (exact there).
/// Mismatches are expected exactly when the system is not distinguished.
EpistemicDiagramReport check_epistemic_diagram(const Mas& m, const std::string& a,
                                               const StateSet& s, int depth,
                                               long state_budget = 100000,
                                               long node_cap = 1000000);

struct IsoReport {
  std::vector<Mismatch> mismatches;  // finitary_member = membership on m1 side
  int exact_depth = 0;
};

/// Requires iso to be a bijective in-splitting; compares bounded evaluations
/// of a closed formula under the induced node bijection.
IsoReport check_iso_invariance(const Mas& m1, const Mas& m2, const InSplitting& iso,
                               const Formula& f, int depth, int fuel,
                               long node_cap = 1000000);

} // namespace epimu
