#pragma once

#include <string>
#include <vector>

#include "epimu/formula.hpp"
#include "epimu/mas.hpp"

namespace epimu {

/// Node of the decorated syntactic tree. Addresses are {1,2}-sequences with
/// the empty string for the root; every variable node has a Top child.
struct SynNode {
  std::string addr;
  Formula form;                 // subformula rooted here
  FKind kind;                   // label (Top child of a variable has FKind::Top)
  std::string name;             // agent for K/P, variable for Var/Mu/Nu, atom name
  int parent = -1;
  std::vector<int> children;
  bool closed = false;
  std::vector<std::string> ag_ncl;      // sorted agent names
  bool is_nearest_closed_succ = false;  // closed non-root (ncs of its parent)
  int var_slot = -1;                    // binder slot for Mu/Nu/Var, else -1
};

struct SynTree {
  std::vector<SynNode> nodes;  // preorder; nodes[0] is the root
  int n_vars = 0;              // distinct bound variables, slot-indexed by
                               // binder discovery order (preorder)
  std::vector<std::string> slot_names;

  const SynNode& root() const { return nodes[0]; }
  int find(const std::string& addr) const;  // -1 when absent
};

/// Builds the tree with all decorations (closed, agNCl, ncs marks, variable
/// slots). The formula must already have unique binders (parser output).
SynTree syntactic_tree(const Formula& f);

struct NonMixingResult {
  bool ok = true;
  std::string agent_a, agent_b;  // witness pair when not ok
  std::string node_addr;
  std::string node_form;
  std::string message;
};

/// A formula is in the checkable fragment iff any two agents whose epistemic
/// operators are simultaneously non-closed at a node have inclusion-comparable
/// observation sets in m. Throws input_error for agents absent from m.
NonMixingResult check_nonmixing(const Formula& f, const Mas& m);
NonMixingResult check_nonmixing(const SynTree& st, const Mas& m);

} // namespace epimu
