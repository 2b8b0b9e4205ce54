#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "epimu/state_set.hpp"

namespace epimu {

/// Finite multi-agent system: states 1..n, a total transition relation,
/// a non-empty set of initial states, atomic propositions with per-state
/// label sets, and per-agent observable atom subsets.
struct Mas {
  int n_states = 0;
  std::vector<std::string> agents;              // declaration order
  std::vector<std::string> atoms;               // declaration order
  std::map<std::string, std::set<std::string>> obs;   // agent -> observable atoms
  std::vector<std::set<std::string>> labels;    // 1-based; labels[0] unused
  std::vector<std::pair<int, int>> trans;       // sorted, duplicate-free
  std::vector<int> inits;                       // sorted, duplicate-free

  bool has_agent(const std::string& a) const;
  bool has_atom(const std::string& p) const;
  const std::set<std::string>& label_of(int q) const { return labels[q]; }

  /// Successors of q in increasing order.
  std::vector<int> successors(int q) const;
  std::vector<int> predecessors(int q) const;
  int outdeg(int q) const;

  /// Label of q projected onto agent a's observable atoms.
  std::set<std::string> obs_label(int q, const std::string& a) const;

  void normalize(); // sort + dedupe trans/inits

  bool operator==(const Mas& o) const;
};

struct Violation {
  std::string message;
};

/// Structural checks: indices in range, obs/labels within the atom set,
/// every state reachable from an initial state, every state has a successor.
/// Violations are data, not exceptions.
std::vector<Violation> validate_mas(const Mas& m);

using Run = std::vector<int>; // non-empty; run[0] initial, consecutive pairs in trans

bool is_run(const Mas& m, const Run& r);

/// Per-position observation of agent a along a run: element i = label(run[i]) ∩ obs(a).
std::vector<std::set<std::string>> obs_trace(const Mas& m, const std::string& a, const Run& r);

/// Synchronous observational equivalence: equal length and position-wise equal
/// observations, including the first position. Throws input_error on invalid runs.
bool obs_equiv(const Mas& m, const std::string& a, const Run& r1, const Run& r2);

/// All runs of length <= depth, ordered by length then lexicographically.
/// Throws budget_error when more than node_cap runs would be produced.
std::vector<Run> runs_up_to(const Mas& m, int depth, long node_cap = 1000000);

/// Precomputed dense indices for the hot loops (observation codes, sorted
/// successor lists, atom ids). Valid as long as the Mas is unchanged.
struct MasIndex {
  explicit MasIndex(const Mas& m);

  const Mas* m;
  std::map<std::string, int> atom_id;              // atom -> 0-based id
  std::vector<uint64_t> label_mask;                // per state (atoms <= 64 asserted)
  std::map<std::string, uint64_t> obs_mask;        // per agent
  // obs_code[a][q]: dense id of label(q) ∩ obs(a); equal codes <=> equal observation
  std::map<std::string, std::vector<int>> obs_code;
  std::vector<std::vector<int>> succ;              // per state, sorted
  std::vector<std::vector<int>> pred;

  int code(const std::string& agent, int q) const { return obs_code.at(agent)[q]; }
};

/// Line-oriented textual format; '#' starts a comment. See README for the layout.
Mas parse_mas(const std::string& text);
Mas parse_mas_file(const std::string& path);

/// Canonical printer; parse(print(m)) == m and reprints are byte-identical.
std::string print_mas(const Mas& m);

} // namespace epimu
