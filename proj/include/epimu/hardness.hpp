#pragma once

#include <memory>
#include <string>
#include <vector>

#include "epimu/formula.hpp"
#include "epimu/mas.hpp"

namespace epimu {

enum class SfKind { Empty, Eps, Sym, Cat, Alt, Compl };

struct SfNode;
using SfExpr = std::shared_ptr<const SfNode>;

/// Star-free expression without Kleene star; complementation is relative to
/// the full word set over the alphabet.
struct SfNode {
  SfKind kind;
  std::string sym;  // Sym only
  SfExpr left, right;
};

SfExpr sf_empty();
SfExpr sf_eps();
SfExpr sf_sym(const std::string& s);
SfExpr sf_cat(SfExpr a, SfExpr b);
SfExpr sf_alt(SfExpr a, SfExpr b);
SfExpr sf_compl(SfExpr a);

std::string print_sf(const SfExpr& e);

using Word = std::vector<std::string>;

/// Membership by structural recursion; complement is w.r.t. all words over
/// the given alphabet (the word itself must already be over it).
bool sf_membership(const SfExpr& e, const Word& w);

/// All symbols occurring in the expression (inside complements too).
std::vector<std::string> sf_symbols(const SfExpr& e);

/// Checks the shape constraints of a pluggable expression: the argument of
/// every complement must not accept the empty word. Throws input_error.
void validate_context_star_free(const SfExpr& e);

struct SfxFile {
  SfExpr expr;
  std::vector<std::string> alphabet;  // declared, or occurring symbols
};

/// Sectioned definition format with '~E' for complementation; see README.
SfxFile parse_sfx(const std::string& text);
SfxFile parse_sfx_file(const std::string& path);

/// State-labeled automaton: the word of a path is the label sequence of the
/// states entered after the (unlabeled) initial state.
struct Moore {
  int n = 0;                        // states 1..n; state 1 is initial
  std::vector<std::string> label;   // 1-based; "" for the initial state
  std::vector<std::pair<int, int>> trans;
  std::vector<int> finals;          // sorted
  // hole bookkeeping (only when built with a designated hole symbol)
  int x_state = 0;                  // the unique hole-labeled state, 0 if absent
  std::vector<int> finals_x;        // finals reachable only through the hole
  std::vector<int> finals_not_x;    // finals reachable while avoiding the hole
};

/// Position-automaton construction for complement-free expressions. With a
/// designated hole symbol the automaton is normalized so the hole labels
/// exactly one state, and states reachable both through and around the hole
/// are split so the final-state partition by hole avoidance is exact.
/// Throws input_error when the hole symbol occurs more than once.
Moore regex_to_moore(const SfExpr& e, const std::string& hole = "");

struct Reduction {
  Mas mas;
  Formula phi;            // side condition; true for complement-free input
  std::string end_atom;   // labels exactly the absorbing end states
  Formula query;          // eventually-forever (end ∧ phi), expanded
  std::vector<std::string> sigma;      // the surface alphabet
  std::vector<std::string> hole_agents; // observer agent per hole, outermost level
  std::vector<std::string> hole_endx;   // per-hole end marker atoms
};

/// Builds the emptiness-reduction instance: a word is in the language iff
/// some path of the system carries it as its surface-alphabet projection and
/// eventually loops in an end state where the side condition holds.
Reduction build_reduction(const SfExpr& e, const std::vector<std::string>& sigma,
                          long state_budget = 100000);

struct WordMismatch {
  Word word;
  bool expected;  // membership per sf_membership
  bool got;       // bounded witness path found
};

struct ReductionReport {
  std::vector<WordMismatch> mismatches;
  int words_checked = 0;
  int depth = 0;
};

/// For every word up to maxlen: compares membership against the existence of
/// a depth-bounded witness path (surface projection equals the word, ends in
/// an end-state loop, side condition verified at every loop position via the
/// exact closed-formula evaluation on runs).
ReductionReport verify_reduction(const SfExpr& e, const std::vector<std::string>& sigma,
                                 int maxlen, int depth, long state_budget = 100000,
                                 long node_cap = 1000000);

} // namespace epimu
