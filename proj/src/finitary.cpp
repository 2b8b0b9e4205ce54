#include "epimu/finitary.hpp"

#include "epimu/distinction.hpp"
#include "epimu/errors.hpp"

namespace epimu {

GammaRel compute_gamma(const Mas& m, const std::string& a, long state_budget) {
  Distinction d = a_distinction(m, a, state_budget);
  GammaRel g;
  g.n = m.n_states;
  g.row.assign(m.n_states + 1, StateSet());
  std::vector<char> seen(m.n_states + 1, 0);
  for (int i = 1; i <= d.mas.n_states; ++i) {
    int q = d.meta[i].base;
    if (!seen[q]) {
      g.row[q] = d.meta[i].info;
      seen[q] = 1;
    } else {
      g.row[q] &= d.meta[i].info;
    }
  }
  for (int q = 1; q <= m.n_states; ++q)
    if (!seen[q])
      throw internal_error("compute_gamma: state " + std::to_string(q) +
                           " never appears in the determinization (unreachable input?)");
  return g;
}

StateSet ax_f(const Mas& m, const StateSet& s) {
  StateSet r(m.n_states);
  for (int q = 1; q <= m.n_states; ++q) {
    bool all = true;
    for (auto& [x, y] : m.trans)
      if (x == q && !s.contains(y)) { all = false; break; }
    if (all) r.insert(q);
  }
  return r;
}

StateSet ex_f(const Mas& m, const StateSet& s) {
  StateSet r(m.n_states);
  for (auto& [x, y] : m.trans)
    if (s.contains(y)) r.insert(x);
  return r;
}

StateSet pa_f(const GammaRel& g, const StateSet& s) {
  StateSet r(g.n);
  for (int q : s.elements()) r |= g.row[q];
  return r;
}

StateSet ka_f(const GammaRel& g, const StateSet& s) {
  return pa_f(g, s.complement()).complement();
}

namespace {

struct FinEval {
  const Mas& m;
  const std::map<std::string, GammaRel>& gammas;
  MasIndex idx;

  explicit FinEval(const Mas& m, const std::map<std::string, GammaRel>& g)
      : m(m), gammas(g), idx(m) {}

  StateSet ax(const StateSet& s) const {
    StateSet r(m.n_states);
    for (int q = 1; q <= m.n_states; ++q) {
      bool all = true;
      for (int y : idx.succ[q])
        if (!s.contains(y)) { all = false; break; }
      if (all) r.insert(q);
    }
    return r;
  }
  StateSet ex(const StateSet& s) const {
    StateSet r(m.n_states);
    for (int q = 1; q <= m.n_states; ++q)
      for (int y : idx.succ[q])
        if (s.contains(y)) { r.insert(q); break; }
    return r;
  }

  StateSet eval(const Formula& f, VarEnv env) const {
    switch (f->kind) {
      case FKind::Top: return StateSet::full(m.n_states);
      case FKind::Bot: return StateSet(m.n_states);
      case FKind::Atom: {
        StateSet r(m.n_states);
        for (int q = 1; q <= m.n_states; ++q)
          if (m.labels[q].count(f->name)) r.insert(q);
        return r;
      }
      case FKind::NegAtom: {
        StateSet r(m.n_states);
        for (int q = 1; q <= m.n_states; ++q)
          if (!m.labels[q].count(f->name)) r.insert(q);
        return r;
      }
      case FKind::Var: {
        auto it = env.find(f->name);
        if (it == env.end()) throw input_error("unbound variable: " + f->name);
        return it->second;
      }
      case FKind::And: return eval(f->left, env) & eval(f->right, env);
      case FKind::Or: return eval(f->left, env) | eval(f->right, env);
      case FKind::AX: return ax(eval(f->left, env));
      case FKind::EX: return ex(eval(f->left, env));
      case FKind::K:
      case FKind::P: {
        auto it = gammas.find(f->name);
        if (it == gammas.end())
          throw input_error("missing Gamma relation for agent: " + f->name);
        StateSet arg = eval(f->left, env);
        return f->kind == FKind::K ? ka_f(it->second, arg) : pa_f(it->second, arg);
      }
      case FKind::Mu:
      case FKind::Nu: {
        StateSet cur =
            f->kind == FKind::Mu ? StateSet(m.n_states) : StateSet::full(m.n_states);
        for (int i = 0; i <= m.n_states + 1; ++i) {
          VarEnv env2 = env;
          env2[f->name] = cur;
          StateSet next = eval(f->left, env2);
          if (next == cur) return cur;
          cur = next;
        }
        throw internal_error("fixpoint failed to converge within |Q| steps");
      }
    }
    throw internal_error("eval_finitary: bad kind");
  }
};

} // namespace

StateSet eval_finitary(const Formula& f, const Mas& m, const VarEnv& env,
                       const std::map<std::string, GammaRel>& gammas) {
  for (const auto& [v, s] : env)
    if (s.universe_size() != m.n_states)
      throw input_error("environment set for " + v + " is not over this system");
  FinEval ev(m, gammas);
  return ev.eval(f, env);
}

std::map<std::string, GammaRel> compute_gammas(const Mas& m, const Formula& f,
                                               long state_budget) {
  std::map<std::string, GammaRel> out;
  for (const auto& a : agents_of(f)) out.emplace(a, compute_gamma(m, a, state_budget));
  return out;
}

} // namespace epimu
