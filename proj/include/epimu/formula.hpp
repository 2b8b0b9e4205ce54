#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace epimu {

enum class FKind { Top, Bot, Atom, NegAtom, Var, And, Or, AX, EX, K, P, Mu, Nu };

struct FNode;
using Formula = std::shared_ptr<const FNode>;

/// Immutable AST node of the positive-form calculus. Negation exists only on
/// atoms; K/P carry an agent; Mu/Nu bind a variable name unique in the whole
/// formula (the parser alpha-renames).
struct FNode {
  FKind kind;
  std::string name;   // atom (Atom/NegAtom), variable (Var/Mu/Nu), agent (K/P)
  Formula left;       // unary child or left operand
  Formula right;      // right operand of And/Or
};

Formula f_top();
Formula f_bot();
Formula f_atom(const std::string& p);
Formula f_neg_atom(const std::string& p);
Formula f_var(const std::string& z);
Formula f_and(Formula a, Formula b);
Formula f_or(Formula a, Formula b);
Formula f_ax(Formula a);
Formula f_ex(Formula a);
Formula f_know(const std::string& agent, Formula a);
Formula f_poss(const std::string& agent, Formula a);
Formula f_mu(const std::string& z, Formula a);
Formula f_nu(const std::string& z, Formula a);

bool equal(const Formula& a, const Formula& b);

std::set<std::string> free_vars(const Formula& f);
bool is_closed(const Formula& f);
std::set<std::string> atoms_of(const Formula& f);
std::set<std::string> agents_of(const Formula& f);
std::set<std::string> bound_vars(const Formula& f);

/// Negation of a formula in positive form (De Morgan over the whole grammar;
/// fixpoints swap and keep their variable). Sound for closed formulas and for
/// open ones under the usual reading where variables denote fixed sets.
Formula dual(const Formula& f);

/// Rename bound variables so every binder introduces a fresh name; free
/// variables are untouched. Used by the parser and by macro expansion.
Formula alpha_rename(const Formula& f, std::set<std::string>& used);

struct ParseOptions {
  bool require_closed = false;
};

/// Concrete grammar (see README): true false ATOM !ATOM VAR & | AX EX
/// K[agent] P[agent] mu VAR . nu VAR . with precedence {! K P AX EX} > & > |;
/// fixpoint scope extends maximally right. '#' starts a comment.
/// An identifier is a variable iff it is bound by an enclosing mu/nu.
Formula parse_formula(const std::string& text, const ParseOptions& opts = {});
Formula parse_formula_file(const std::string& path, const ParseOptions& opts = {});

/// Fully parenthesized canonical form; parse(print(f)) == f.
std::string print_formula(const Formula& f);

/// Derived operators as fixpoint rewrites. Known names: EF AF EG AG AGAF
/// ABoxDiamond ADiamondBox EBoxDiamond EDiamondBox. Bound variables of the
/// expansion are fresh with respect to the argument.
Formula expand_macro(const std::string& name, const std::vector<Formula>& args);

} // namespace epimu
