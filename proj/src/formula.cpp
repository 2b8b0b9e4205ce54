#include "epimu/formula.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "epimu/errors.hpp"

namespace epimu {

namespace {
Formula node(FKind k, std::string name, Formula l = nullptr, Formula r = nullptr) {
  auto n = std::make_shared<FNode>();
  n->kind = k;
  n->name = std::move(name);
  n->left = std::move(l);
  n->right = std::move(r);
  return n;
}
} // namespace

Formula f_top() { return node(FKind::Top, ""); }
Formula f_bot() { return node(FKind::Bot, ""); }
Formula f_atom(const std::string& p) { return node(FKind::Atom, p); }
Formula f_neg_atom(const std::string& p) { return node(FKind::NegAtom, p); }
Formula f_var(const std::string& z) { return node(FKind::Var, z); }
Formula f_and(Formula a, Formula b) { return node(FKind::And, "", std::move(a), std::move(b)); }
Formula f_or(Formula a, Formula b) { return node(FKind::Or, "", std::move(a), std::move(b)); }
Formula f_ax(Formula a) { return node(FKind::AX, "", std::move(a)); }
Formula f_ex(Formula a) { return node(FKind::EX, "", std::move(a)); }
Formula f_know(const std::string& ag, Formula a) { return node(FKind::K, ag, std::move(a)); }
Formula f_poss(const std::string& ag, Formula a) { return node(FKind::P, ag, std::move(a)); }
Formula f_mu(const std::string& z, Formula a) { return node(FKind::Mu, z, std::move(a)); }
Formula f_nu(const std::string& z, Formula a) { return node(FKind::Nu, z, std::move(a)); }

bool equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->name != b->name) return false;
  return equal(a->left, b->left) && equal(a->right, b->right);
}

namespace {
void walk(const Formula& f, const std::function<void(const FNode&)>& fn) {
  if (!f) return;
  fn(*f);
  walk(f->left, fn);
  walk(f->right, fn);
}

void free_vars_rec(const Formula& f, std::set<std::string>& bound, std::set<std::string>& out) {
  if (!f) return;
  switch (f->kind) {
    case FKind::Var:
      if (!bound.count(f->name)) out.insert(f->name);
      return;
    case FKind::Mu:
    case FKind::Nu: {
      bool fresh = bound.insert(f->name).second;
      free_vars_rec(f->left, bound, out);
      if (fresh) bound.erase(f->name);
      return;
    }
    default:
      free_vars_rec(f->left, bound, out);
      free_vars_rec(f->right, bound, out);
  }
}
} // namespace

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> bound, out;
  free_vars_rec(f, bound, out);
  return out;
}

bool is_closed(const Formula& f) { return free_vars(f).empty(); }

std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  walk(f, [&](const FNode& n) {
    if (n.kind == FKind::Atom || n.kind == FKind::NegAtom) out.insert(n.name);
  });
  return out;
}

std::set<std::string> agents_of(const Formula& f) {
  std::set<std::string> out;
  walk(f, [&](const FNode& n) {
    if (n.kind == FKind::K || n.kind == FKind::P) out.insert(n.name);
  });
  return out;
}

std::set<std::string> bound_vars(const Formula& f) {
  std::set<std::string> out;
  walk(f, [&](const FNode& n) {
    if (n.kind == FKind::Mu || n.kind == FKind::Nu) out.insert(n.name);
  });
  return out;
}

Formula dual(const Formula& f) {
  switch (f->kind) {
    case FKind::Top: return f_bot();
    case FKind::Bot: return f_top();
    case FKind::Atom: return f_neg_atom(f->name);
    case FKind::NegAtom: return f_atom(f->name);
    case FKind::Var: return f_var(f->name);
    case FKind::And: return f_or(dual(f->left), dual(f->right));
    case FKind::Or: return f_and(dual(f->left), dual(f->right));
    case FKind::AX: return f_ex(dual(f->left));
    case FKind::EX: return f_ax(dual(f->left));
    case FKind::K: return f_poss(f->name, dual(f->left));
    case FKind::P: return f_know(f->name, dual(f->left));
    case FKind::Mu: return f_nu(f->name, dual(f->left));
    case FKind::Nu: return f_mu(f->name, dual(f->left));
  }
  throw internal_error("dual: bad kind");
}

namespace {
Formula rename_rec(const Formula& f, std::map<std::string, std::string>& env,
                   std::set<std::string>& used) {
  switch (f->kind) {
    case FKind::Top:
    case FKind::Bot:
    case FKind::Atom:
    case FKind::NegAtom:
      return f;
    case FKind::Var: {
      auto it = env.find(f->name);
      return it == env.end() ? f : f_var(it->second);
    }
    case FKind::And:
      return f_and(rename_rec(f->left, env, used), rename_rec(f->right, env, used));
    case FKind::Or:
      return f_or(rename_rec(f->left, env, used), rename_rec(f->right, env, used));
    case FKind::AX: return f_ax(rename_rec(f->left, env, used));
    case FKind::EX: return f_ex(rename_rec(f->left, env, used));
    case FKind::K: return f_know(f->name, rename_rec(f->left, env, used));
    case FKind::P: return f_poss(f->name, rename_rec(f->left, env, used));
    case FKind::Mu:
    case FKind::Nu: {
      std::string fresh = f->name;
      int i = 2;
      while (used.count(fresh)) fresh = f->name + "_" + std::to_string(i++);
      used.insert(fresh);
      auto saved = env.find(f->name) != env.end()
                       ? std::optional<std::string>(env[f->name])
                       : std::nullopt;
      env[f->name] = fresh;
      Formula body = rename_rec(f->left, env, used);
      if (saved) env[f->name] = *saved; else env.erase(f->name);
      return f->kind == FKind::Mu ? f_mu(fresh, body) : f_nu(fresh, body);
    }
  }
  throw internal_error("rename: bad kind");
}
} // namespace

Formula alpha_rename(const Formula& f, std::set<std::string>& used) {
  std::map<std::string, std::string> env;
  return rename_rec(f, env, used);
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  enum Kind { Ident, LPar, RPar, LBrack, RBrack, Amp, Bar, Bang, Dot, End } kind;
  std::string text;
  int line, col;
};

struct Lexer {
  explicit Lexer(const std::string& s) : s(s) {}
  const std::string& s;
  size_t i = 0;
  int line = 1, col = 1;

  void bump() {
    if (i < s.size() && s[i] == '\n') { ++line; col = 1; } else ++col;
    ++i;
  }

  Token next() {
    for (;;) {
      while (i < s.size() && isspace((unsigned char)s[i])) bump();
      if (i < s.size() && s[i] == '#') {
        while (i < s.size() && s[i] != '\n') bump();
        continue;
      }
      break;
    }
    int l = line, c = col;
    if (i >= s.size()) return {Token::End, "", l, c};
    char ch = s[i];
    if (isalnum((unsigned char)ch) || ch == '_') {
      std::string t;
      while (i < s.size() && (isalnum((unsigned char)s[i]) || s[i] == '_' || s[i] == '\'')) {
        t += s[i];
        bump();
      }
      return {Token::Ident, t, l, c};
    }
    bump();
    switch (ch) {
      case '(': return {Token::LPar, "(", l, c};
      case ')': return {Token::RPar, ")", l, c};
      case '[': return {Token::LBrack, "[", l, c};
      case ']': return {Token::RBrack, "]", l, c};
      case '&': return {Token::Amp, "&", l, c};
      case '|': return {Token::Bar, "|", l, c};
      case '!': return {Token::Bang, "!", l, c};
      case '.': return {Token::Dot, ".", l, c};
      default: throw parse_error(std::string("unexpected character '") + ch + "'", l, c);
    }
  }
};

struct Parser {
  explicit Parser(const std::string& s) : lex(s) { tok = lex.next(); }
  Lexer lex;
  Token tok;
  std::set<std::string> scope; // variables bound by enclosing fixpoints

  void advance() { tok = lex.next(); }
  [[noreturn]] void fail(const std::string& msg) { throw parse_error(msg, tok.line, tok.col); }

  bool at_ident(const char* kw) const { return tok.kind == Token::Ident && tok.text == kw; }

  Formula parse() {
    Formula f = disjunction();
    if (tok.kind != Token::End) fail("trailing input after formula");
    return f;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (tok.kind == Token::Bar) {
      advance();
      f = f_or(f, conjunction());
    }
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (tok.kind == Token::Amp) {
      advance();
      f = f_and(f, unary());
    }
    return f;
  }

  Formula unary() {
    if (tok.kind == Token::Bang) {
      int l = tok.line, c = tok.col;
      advance();
      if (tok.kind != Token::Ident || at_ident("true") || at_ident("false") ||
          at_ident("mu") || at_ident("nu") || at_ident("AX") || at_ident("EX") ||
          at_ident("K") || at_ident("P"))
        throw parse_error("negation applies only to atoms", l, c);
      std::string name = tok.text;
      if (scope.count(name)) throw parse_error("negation applied to variable " + name, l, c);
      advance();
      return f_neg_atom(name);
    }
    if (at_ident("AX")) { advance(); return f_ax(unary()); }
    if (at_ident("EX")) { advance(); return f_ex(unary()); }
    if (at_ident("K") || at_ident("P")) {
      bool know = tok.text == "K";
      advance();
      if (tok.kind != Token::LBrack) fail("expected [agent] after K/P");
      advance();
      if (tok.kind != Token::Ident) fail("expected agent name");
      std::string ag = tok.text;
      advance();
      if (tok.kind != Token::RBrack) fail("expected ] after agent name");
      advance();
      Formula arg = unary();
      return know ? f_know(ag, arg) : f_poss(ag, arg);
    }
    if (at_ident("mu") || at_ident("nu")) {
      bool mu = tok.text == "mu";
      advance();
      if (tok.kind != Token::Ident) fail("expected variable after mu/nu");
      std::string z = tok.text;
      advance();
      if (tok.kind != Token::Dot) fail("expected '.' after fixpoint variable");
      advance();
      bool fresh = scope.insert(z).second;
      if (!fresh) fail("variable " + z + " already bound on this branch");
      Formula body = disjunction(); // maximal scope to the right
      scope.erase(z);
      return mu ? f_mu(z, body) : f_nu(z, body);
    }
    if (tok.kind == Token::LPar) {
      advance();
      Formula f = disjunction();
      if (tok.kind != Token::RPar) fail("expected )");
      advance();
      return f;
    }
    if (tok.kind == Token::Ident) {
      std::string name = tok.text;
      advance();
      if (name == "true") return f_top();
      if (name == "false") return f_bot();
      if (scope.count(name)) return f_var(name);
      return f_atom(name);
    }
    fail("expected formula");
  }
};

} // namespace

Formula parse_formula(const std::string& text, const ParseOptions& opts) {
  Parser p(text);
  Formula f = p.parse();
  if (opts.require_closed && !is_closed(f)) {
    std::string v = *free_vars(f).begin();
    throw input_error("unbound variable: " + v);
  }
  std::set<std::string> used;
  return alpha_rename(f, used);
}

Formula parse_formula_file(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open formula file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_formula(ss.str(), opts);
}

namespace {
void print_rec(const Formula& f, std::ostringstream& os) {
  switch (f->kind) {
    case FKind::Top: os << "true"; return;
    case FKind::Bot: os << "false"; return;
    case FKind::Atom: os << f->name; return;
    case FKind::NegAtom: os << "!" << f->name; return;
    case FKind::Var: os << f->name; return;
    case FKind::And:
    case FKind::Or:
      os << "(";
      print_rec(f->left, os);
      os << (f->kind == FKind::And ? " & " : " | ");
      print_rec(f->right, os);
      os << ")";
      return;
    case FKind::AX:
    case FKind::EX:
      os << (f->kind == FKind::AX ? "AX " : "EX ");
      print_rec(f->left, os);
      return;
    case FKind::K:
    case FKind::P:
      os << (f->kind == FKind::K ? "K[" : "P[") << f->name << "] ";
      print_rec(f->left, os);
      return;
    case FKind::Mu:
    case FKind::Nu:
      os << (f->kind == FKind::Mu ? "mu " : "nu ") << f->name << ". (";
      print_rec(f->left, os);
      os << ")";
      return;
  }
}
} // namespace

std::string print_formula(const Formula& f) {
  std::ostringstream os;
  print_rec(f, os);
  return os.str();
}

Formula expand_macro(const std::string& name, const std::vector<Formula>& args) {
  auto arity = [&](size_t n) {
    if (args.size() != n)
      throw input_error("macro " + name + " expects " + std::to_string(n) + " argument(s)");
  };
  // fresh variables w.r.t. the arguments
  std::set<std::string> used;
  for (const auto& a : args)
    for (const auto& v : bound_vars(a)) used.insert(v);
  for (const auto& a : args)
    for (const auto& v : free_vars(a)) used.insert(v);
  auto fresh = [&](const std::string& base) {
    std::string z = base;
    int i = 2;
    while (used.count(z)) z = base + "_" + std::to_string(i++);
    used.insert(z);
    return z;
  };

  if (name == "EF") {
    arity(1);
    std::string z = fresh("Z");
    return f_mu(z, f_or(args[0], f_ex(f_var(z))));
  }
  if (name == "AF") {
    arity(1);
    std::string z = fresh("Z");
    return f_mu(z, f_or(args[0], f_ax(f_var(z))));
  }
  if (name == "EG") {
    arity(1);
    std::string z = fresh("Z");
    return f_nu(z, f_and(args[0], f_ex(f_var(z))));
  }
  if (name == "AG") {
    arity(1);
    std::string z = fresh("Z");
    return f_nu(z, f_and(args[0], f_ax(f_var(z))));
  }
  if (name == "AGAF" || name == "ABoxDiamond") {
    // on every path, the argument holds infinitely often
    arity(1);
    std::string z = fresh("Z");
    std::string y = fresh("Y");
    return f_nu(z, f_and(f_mu(y, f_or(args[0], f_ax(f_var(y)))), f_ax(f_var(z))));
  }
  if (name == "EDiamondBox") {
    // some path eventually stays in the argument forever
    arity(1);
    std::string z1 = fresh("Z1");
    std::string z2 = fresh("Z2");
    return f_mu(z1, f_or(f_nu(z2, f_and(args[0], f_ex(f_var(z2)))), f_ex(f_var(z1))));
  }
  if (name == "ADiamondBox") {
    // every path eventually stays in the argument forever; the escape
    // disjunct must sit inside the greatest fixpoint (outside it the formula
    // weakens to AF AG)
    arity(1);
    std::string y = fresh("Y");
    std::string z = fresh("Z");
    return f_mu(y, f_nu(z, f_or(f_and(args[0], f_ax(f_var(z))), f_ax(f_var(y)))));
  }
  if (name == "EBoxDiamond") {
    // some path visits the argument infinitely often
    arity(1);
    std::string y = fresh("Y");
    std::string z = fresh("Z");
    return f_nu(y, f_mu(z, f_or(f_and(args[0], f_ex(f_var(y))), f_ex(f_var(z)))));
  }
  throw input_error("unknown macro: " + name);
}

} // namespace epimu
