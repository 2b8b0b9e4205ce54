#include "epimu/oracle.hpp"

#include <algorithm>

#include "epimu/errors.hpp"

namespace epimu {

BoundedTree::BoundedTree(const Mas& m, int depth, long node_cap)
    : m_(&m), idx_(m), depth_(depth) {
  if (depth < 1) throw input_error("bounded tree depth must be >= 1");
  state_.assign(1, 0);
  level_.assign(1, 0);
  parent_.assign(1, 0);
  children_.assign(1, {});
  by_level_.assign(depth + 1, {});

  auto add = [&](int st, int lvl, int par) {
    int id = (int)state_.size();
    if ((long)id > node_cap)
      throw budget_error("bounded tree node budget exceeded (" + std::to_string(node_cap) + ")");
    state_.push_back(st);
    level_.push_back(lvl);
    parent_.push_back(par);
    children_.push_back({});
    by_level_[lvl].push_back(id);
    if (par > 0) children_[par].push_back(id);
    return id;
  };

  for (int q : m.inits) add(q, 1, 0);
  for (int l = 1; l < depth; ++l)
    for (int u : by_level_[l])
      for (int s : idx_.succ[state_[u]]) add(s, l + 1, u);
}

Run BoundedTree::run_of(int node) const {
  Run r;
  for (int u = node; u > 0; u = parent_[u]) r.push_back(state_[u]);
  std::reverse(r.begin(), r.end());
  return r;
}

int BoundedTree::node_of(const Run& r) const {
  if (r.empty() || (int)r.size() > depth_) return -1;
  int cur = -1;
  for (int u : by_level_[1])
    if (state_[u] == r[0]) { cur = u; break; }
  if (cur < 0) return -1;
  for (size_t i = 1; i < r.size(); ++i) {
    int next = -1;
    for (int c : children_[cur])
      if (state_[c] == r[i]) { next = c; break; }
    if (next < 0) return -1;
    cur = next;
  }
  return cur;
}

void BoundedTree::ensure_agent(const std::string& a) const {
  if (class_.count(a)) return;
  if (!m_->has_agent(a)) throw input_error("unknown agent: " + a);
  const auto& code = idx_.obs_code.at(a);
  std::vector<int> cls(state_.size(), -1);
  // class of a node = interned (parent class, own observation) pair
  std::map<std::pair<int, int>, int> intern;
  for (int l = 1; l <= depth_; ++l)
    for (int u : by_level_[l]) {
      int pc = parent_[u] > 0 ? cls[parent_[u]] : -1;
      auto key = std::make_pair(pc, code[state_[u]]);
      auto [it, fresh] = intern.emplace(key, (int)intern.size());
      cls[u] = it->second;
    }
  class_[a] = std::move(cls);
}

int BoundedTree::class_of(const std::string& a, int node) const {
  ensure_agent(a);
  return class_.at(a)[node];
}

StateSet BoundedTree::lift(const StateSet& states) const {
  if (states.universe_size() != m_->n_states)
    throw input_error("lift: set is not over this system");
  StateSet r(node_count());
  for (int u = 1; u <= node_count(); ++u)
    if (states.contains(state_[u])) r.insert(u);
  return r;
}

namespace {

struct TreeEval {
  const BoundedTree& bt;
  int fuel;

  std::pair<StateSet, int> eval(const Formula& f, const NodeEnv& env) const {
    int n = bt.node_count();
    switch (f->kind) {
      case FKind::Top: return {StateSet::full(n), 0};
      case FKind::Bot: return {StateSet(n), 0};
      case FKind::Atom:
      case FKind::NegAtom: {
        StateSet r(n);
        for (int u = 1; u <= n; ++u) {
          bool has = bt.mas().labels[bt.state_of(u)].count(f->name) > 0;
          if (has == (f->kind == FKind::Atom)) r.insert(u);
        }
        return {r, 0};
      }
      case FKind::Var: {
        auto it = env.find(f->name);
        if (it == env.end()) throw input_error("unbound variable: " + f->name);
        return {it->second, 0};
      }
      case FKind::And:
      case FKind::Or: {
        auto [l, cl] = eval(f->left, env);
        auto [r, cr] = eval(f->right, env);
        return {f->kind == FKind::And ? (l & r) : (l | r), std::max(cl, cr)};
      }
      case FKind::AX:
      case FKind::EX: {
        auto [s, c] = eval(f->left, env);
        StateSet r(n);
        for (int u = 1; u <= n; ++u) {
          const auto& ch = bt.children_of(u);
          if (f->kind == FKind::AX) {
            bool all = true;
            for (int v : ch)
              if (!s.contains(v)) { all = false; break; }
            if (all) r.insert(u);
          } else {
            for (int v : ch)
              if (s.contains(v)) { r.insert(u); break; }
          }
        }
        return {r, c + 1};
      }
      case FKind::K:
      case FKind::P: {
        auto [s, c] = eval(f->left, env);
        StateSet r(n);
        // one pass per level: a class is in iff all (K) / some (P) members are
        std::map<int, bool> acc;
        for (int l = 1; l <= bt.depth(); ++l) {
          acc.clear();
          for (int u : bt.nodes_at_level(l)) {
            int cl = bt.class_of(f->name, u);
            bool member = s.contains(u);
            auto it = acc.find(cl);
            if (it == acc.end())
              acc[cl] = member;
            else if (f->kind == FKind::K)
              it->second = it->second && member;
            else
              it->second = it->second || member;
          }
          for (int u : bt.nodes_at_level(l))
            if (acc[bt.class_of(f->name, u)]) r.insert(u);
        }
        return {r, c};
      }
      case FKind::Mu:
      case FKind::Nu: {
        StateSet cur = f->kind == FKind::Mu ? StateSet(n) : StateSet::full(n);
        int cost = 0;
        for (int i = 0; i < fuel; ++i) {
          NodeEnv env2 = env;
          env2[f->name] = cur;
          auto [next, c] = eval(f->left, env2);
          cost += c;
          if (next == cur) return {cur, cost};
          cur = next;
        }
        throw budget_error("fixpoint fuel exhausted (" + std::to_string(fuel) + " approximants)");
      }
    }
    throw internal_error("tree_eval: bad kind");
  }
};

} // namespace

TreeEvalResult tree_eval_bounded(const Formula& f, const BoundedTree& bt,
                                 const NodeEnv& env, int fuel) {
  for (const auto& [v, s] : env)
    if (s.universe_size() != bt.node_count())
      throw input_error("environment set for " + v + " is not over this tree");
  TreeEval ev{bt, fuel};
  auto [set, cost] = ev.eval(f, env);
  TreeEvalResult r;
  r.set = set;
  r.modal_cost = cost;
  r.exact_depth = std::max(0, bt.depth() - cost);
  return r;
}

DiagramReport check_plain_diagram(const Formula& f, const Mas& m, int depth, int fuel,
                                  long state_budget, long node_cap) {
  if (!agents_of(f).empty())
    throw input_error("check_plain_diagram: formula must be plain (no K/P)");
  if (!is_closed(f)) throw input_error("check_plain_diagram: formula must be closed");
  (void)state_budget;
  StateSet fin = eval_finitary(f, m, {}, {});
  BoundedTree bt(m, depth, node_cap);
  TreeEvalResult tr = tree_eval_bounded(f, bt, {}, fuel);

  DiagramReport rep;
  rep.exact_depth = tr.exact_depth;
  for (int u = 1; u <= bt.node_count(); ++u) {
    if (bt.level_of(u) > tr.exact_depth) continue;
    ++rep.nodes_checked;
    bool fm = fin.contains(bt.state_of(u));
    bool tm = tr.set.contains(u);
    if (fm != tm) rep.mismatches.push_back({u, bt.run_of(u), fm, tm});
  }
  return rep;
}

EpistemicDiagramReport check_epistemic_diagram(const Mas& m, const std::string& a,
                                               const StateSet& s, int depth,
                                               long state_budget, long node_cap) {
  if (s.universe_size() != m.n_states)
    throw input_error("check_epistemic_diagram: set is not over this system");
  GammaRel g = compute_gamma(m, a, state_budget);
  BoundedTree bt(m, depth, node_cap);

  EpistemicDiagramReport rep;
  rep.depth = depth;
  StateSet lifted = bt.lift(s);
  for (int variant = 0; variant < 2; ++variant) {
    bool know = variant == 0;
    StateSet fin = know ? ka_f(g, s) : pa_f(g, s);
    StateSet fin_nodes = bt.lift(fin);
    Formula op = know ? f_know(a, f_var("Z")) : f_poss(a, f_var("Z"));
    NodeEnv env{{"Z", lifted}};
    StateSet tree_nodes = tree_eval_bounded(op, bt, env, 2).set;
    auto& out = know ? rep.know_mismatches : rep.poss_mismatches;
    for (int u = 1; u <= bt.node_count(); ++u) {
      bool fm = fin_nodes.contains(u);
      bool tm = tree_nodes.contains(u);
      if (fm != tm) out.push_back({u, bt.run_of(u), fm, tm});
    }
  }
  return rep;
}

IsoReport check_iso_invariance(const Mas& m1, const Mas& m2, const InSplitting& iso,
                               const Formula& f, int depth, int fuel, long node_cap) {
  if (!(iso.src == m1) || !(iso.dst == m2))
    throw input_error("check_iso_invariance: mapping does not connect the two systems");
  if (!verify_in_splitting(iso).empty())
    throw input_error("check_iso_invariance: mapping is not an in-splitting");
  if (m1.n_states != m2.n_states)
    throw input_error("check_iso_invariance: mapping is not bijective");
  if (!is_closed(f)) throw input_error("check_iso_invariance: formula must be closed");

  BoundedTree b1(m1, depth, node_cap);
  BoundedTree b2(m2, depth, node_cap);
  TreeEvalResult t1 = tree_eval_bounded(f, b1, {}, fuel);
  TreeEvalResult t2 = tree_eval_bounded(f, b2, {}, fuel);

  IsoReport rep;
  rep.exact_depth = std::min(t1.exact_depth, t2.exact_depth);
  for (int u = 1; u <= b1.node_count(); ++u) {
    if (b1.level_of(u) > rep.exact_depth) continue;
    Run r1 = b1.run_of(u);
    Run r2;
    for (int q : r1) r2.push_back(iso.st_map[q]);
    int v = b2.node_of(r2);
    if (v < 0) throw internal_error("induced node map left the tree");
    bool a = t1.set.contains(u);
    bool b = t2.set.contains(v);
    if (a != b) rep.mismatches.push_back({u, r1, a, b});
  }
  return rep;
}

} // namespace epimu
