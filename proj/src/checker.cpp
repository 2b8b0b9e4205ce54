#include "epimu/checker.hpp"

#include <algorithm>

#include "epimu/errors.hpp"
#include "epimu/oracle.hpp"

namespace epimu {

namespace {

bool obs_subset(const Mas& m, const std::string& a, const std::string& b) {
  const auto& oa = m.obs.at(a);
  const auto& ob = m.obs.at(b);
  return std::includes(ob.begin(), ob.end(), oa.begin(), oa.end());
}

/// Sorts a set of agents into a subset chain, smallest observation set first;
/// equal observation sets order by name. The non-mixing prescreen guarantees
/// comparability; an incomparable pair here is a bug.
std::vector<std::string> sort_chain(std::vector<std::string> agents, const Mas& m) {
  std::sort(agents.begin(), agents.end());
  agents.erase(std::unique(agents.begin(), agents.end()), agents.end());
  for (size_t i = 0; i < agents.size(); ++i)
    for (size_t j = i + 1; j < agents.size(); ++j)
      if (!obs_subset(m, agents[i], agents[j]) && !obs_subset(m, agents[j], agents[i]))
        throw internal_error("determinization chain is not subset-ordered: " + agents[i] +
                             " vs " + agents[j]);
  std::sort(agents.begin(), agents.end(), [&](const std::string& a, const std::string& b) {
    if (m.obs.at(a) == m.obs.at(b)) return a < b;
    return obs_subset(m, a, b);
  });
  return agents;
}

bool is_subsequence(const std::vector<std::string>& small, const std::vector<std::string>& big) {
  size_t i = 0;
  for (size_t j = 0; j < big.size() && i < small.size(); ++j)
    if (big[j] == small[i]) ++i;
  return i == small.size();
}

/// Shortest common supersequence; ties prefer symbols of a.
std::vector<std::string> scs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
  for (int i = (int)n; i >= 0; --i)
    for (int j = (int)m; j >= 0; --j) {
      if (i == (int)n) dp[i][j] = (int)m - j;
      else if (j == (int)m) dp[i][j] = (int)n - i;
      else if (a[i] == b[j]) dp[i][j] = 1 + dp[i + 1][j + 1];
      else dp[i][j] = 1 + std::min(dp[i + 1][j], dp[i][j + 1]);
    }
  std::vector<std::string> out;
  size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i == n) out.push_back(b[j++]);
    else if (j == m) out.push_back(a[i++]);
    else if (a[i] == b[j]) { out.push_back(a[i]); ++i; ++j; }
    else if (dp[i + 1][j] <= dp[i][j + 1]) out.push_back(a[i++]);
    else out.push_back(b[j++]);
  }
  return out;
}

struct Builder {
  const Mas& m;
  long budget;
  InsTree t;
  std::map<std::vector<std::string>, int> sys_by_recipe;

  Builder(const Formula& f, const Mas& mas, long state_budget) : m(mas), budget(state_budget) {
    t.st = syntactic_tree(f);
  }

  int base_system() {
    auto it = sys_by_recipe.find({});
    if (it != sys_by_recipe.end()) return it->second;
    ChainSystem s;
    s.mas = m;
    s.ground.resize(m.n_states + 1);
    for (int q = 1; q <= m.n_states; ++q) s.ground[q] = q;
    for (int q : m.inits) s.init_of[q] = q;
    t.systems.push_back(std::move(s));
    sys_by_recipe[{}] = (int)t.systems.size() - 1;
    return (int)t.systems.size() - 1;
  }

  /// System with the given recipe, built by determinizing from the inside out.
  int system_of(const std::vector<std::string>& recipe) {
    auto it = sys_by_recipe.find(recipe);
    if (it != sys_by_recipe.end()) return it->second;
    if (recipe.empty()) return base_system();
    std::vector<std::string> rest(recipe.begin() + 1, recipe.end());
    int inner = system_of(rest);
    Distinction d = a_distinction(t.systems[inner].mas, recipe[0], budget);
    ChainSystem s;
    s.mas = d.mas;
    s.inner = inner;
    s.agent = recipe[0];
    s.meta = d.meta;
    s.peel = d.chi.st_map;
    s.recipe = recipe;
    s.ground.resize(s.mas.n_states + 1);
    const ChainSystem& in = t.systems[inner];
    for (int q = 1; q <= s.mas.n_states; ++q) s.ground[q] = in.ground[s.peel[q]];
    for (int u : s.mas.inits) {
      int g = s.ground[u];
      if (s.init_of.count(g)) throw internal_error("determinization duplicated an initial state");
      s.init_of[g] = u;
    }
    if ((int)s.init_of.size() != (int)m.inits.size())
      throw internal_error("determinization lost an initial state");
    t.systems.push_back(std::move(s));
    sys_by_recipe[recipe] = (int)t.systems.size() - 1;
    return (int)t.systems.size() - 1;
  }

  std::map<std::pair<int, int>, std::vector<int>> realize_cache;

  /// Canonical in-splitting map between chain systems; requires the target
  /// recipe to be a subsequence of the source recipe. Built from two formers:
  /// peeling the outermost determinization, and lifting a map through one.
  std::vector<int> realize(int si, int ti) {
    if (si == ti) {
      std::vector<int> id(t.systems[si].mas.n_states + 1);
      for (int q = 1; q <= t.systems[si].mas.n_states; ++q) id[q] = q;
      return id;
    }
    auto key = std::make_pair(si, ti);
    auto it = realize_cache.find(key);
    if (it != realize_cache.end()) return it->second;

    const ChainSystem& A = t.systems[si];
    const ChainSystem& B = t.systems[ti];
    if (!is_subsequence(B.recipe, A.recipe))
      throw internal_error("no canonical map: target recipe is not a subsequence");

    std::vector<int> map;
    if (!B.recipe.empty() && A.recipe[0] == B.recipe[0]) {
      // lift the inner map through the shared outer determinization
      std::vector<int> inner_map = realize(A.inner, B.inner);
      std::map<std::pair<int, StateSet>, int> b_index;
      for (int u = 1; u <= B.mas.n_states; ++u)
        b_index[{B.meta[u].base, B.meta[u].info}] = u;
      int inner_n = t.systems[B.inner].mas.n_states;
      map.assign(A.mas.n_states + 1, 0);
      for (int u = 1; u <= A.mas.n_states; ++u) {
        int qb = inner_map[A.meta[u].base];
        StateSet info(inner_n);
        for (int s : A.meta[u].info.elements()) info.insert(inner_map[s]);
        auto itb = b_index.find({qb, info});
        if (itb == b_index.end())
          throw internal_error("lifted state has no image in the target determinization");
        map[u] = itb->second;
      }
    } else {
      // peel the outermost determinization of the source
      std::vector<int> rest = realize(A.inner, ti);
      map.assign(A.mas.n_states + 1, 0);
      for (int u = 1; u <= A.mas.n_states; ++u) map[u] = rest[A.peel[u]];
    }
    realize_cache[key] = map;
    return map;
  }

  /// Nearest closed successors of a closed node: closed descendants reachable
  /// through non-closed nodes only.
  std::vector<int> ncs_of(int z) const {
    std::vector<int> out, work{z};
    while (!work.empty()) {
      int x = work.back();
      work.pop_back();
      for (int c : t.st.nodes[x].children) {
        if (t.st.nodes[c].closed) out.push_back(c);
        else work.push_back(c);
      }
    }
    std::sort(out.begin(), out.end());  // preorder ids sort by address order
    return out;
  }

  /// Agents whose epistemic operators live inside the region rooted at the
  /// closed node z: z's own label plus the non-closed children's agent sets.
  std::vector<std::string> need_of(int z) const {
    const SynNode& n = t.st.nodes[z];
    std::vector<std::string> a;
    if (n.kind == FKind::K || n.kind == FKind::P) a.push_back(n.name);
    for (int c : n.children) {
      const SynNode& ch = t.st.nodes[c];
      if (!ch.closed) a.insert(a.end(), ch.ag_ncl.begin(), ch.ag_ncl.end());
    }
    return a;
  }

  std::map<int, int> region_sys_of_closed;  // closed node -> system index

  int build_region(int z) {
    auto it = region_sys_of_closed.find(z);
    if (it != region_sys_of_closed.end()) return it->second;

    std::vector<int> boundary = ncs_of(z);
    std::vector<std::string> base_recipe;
    for (int c : boundary) {
      int cs = build_region(c);
      base_recipe = scs(base_recipe, t.systems[cs].recipe);
    }
    std::vector<std::string> chain = sort_chain(need_of(z), m);
    std::vector<std::string> recipe = chain;
    recipe.insert(recipe.end(), base_recipe.begin(), base_recipe.end());
    int s = system_of(recipe);
    region_sys_of_closed[z] = s;

    // the boundary nodes' in-splittings: peel this region's tower, then the
    // canonical base map down to the child region's system
    int base_sys = system_of(base_recipe);
    std::vector<int> tower_map = realize(s, base_sys);
    for (int c : boundary) {
      int cs = region_sys_of_closed.at(c);
      std::vector<int> base_map = realize(base_sys, cs);
      NodeIns ins;
      ins.dom_sys = s;
      ins.cod_sys = cs;
      ins.tower = chain;
      ins.st_map.assign(t.systems[s].mas.n_states + 1, 0);
      for (int q = 1; q <= t.systems[s].mas.n_states; ++q)
        ins.st_map[q] = base_map[tower_map[q]];
      t.node_ins[c] = std::move(ins);
      t.region_sys[c] = cs;  // a closed node belongs to its own region
    }
    // non-closed nodes of the region carry identities over sys(z)
    std::vector<int> work{z};
    while (!work.empty()) {
      int x = work.back();
      work.pop_back();
      for (int c : t.st.nodes[x].children)
        if (!t.st.nodes[c].closed) {
          t.region_sys[c] = s;
          NodeIns id;
          id.dom_sys = s;
          id.cod_sys = s;
          id.st_map.resize(t.systems[s].mas.n_states + 1);
          for (int q = 1; q <= t.systems[s].mas.n_states; ++q) id.st_map[q] = q;
          t.node_ins[c] = std::move(id);
          work.push_back(c);
        }
    }
    return s;
  }

  InsTree run() {
    if (!t.st.root().closed) throw input_error("model checking requires a closed formula");
    t.node_ins.assign(t.st.nodes.size(), {});
    t.region_sys.assign(t.st.nodes.size(), 0);
    int rs = build_region(0);
    t.root_sys = rs;
    t.region_sys[0] = rs;
    NodeIns id;
    id.dom_sys = rs;
    id.cod_sys = rs;
    id.st_map.resize(t.systems[rs].mas.n_states + 1);
    for (int q = 1; q <= t.systems[rs].mas.n_states; ++q) id.st_map[q] = q;
    t.node_ins[0] = std::move(id);
    return std::move(t);
  }
};

} // namespace

std::vector<int> InsTree::path_map(int node) const {
  // maps states of the root system; composition root -> node
  std::vector<int> acc = node_ins[0].st_map;
  std::vector<int> chain;
  for (int x = node; x > 0; x = st.nodes[x].parent) chain.push_back(x);
  std::reverse(chain.begin(), chain.end());
  for (int x : chain) {
    const auto& mp = node_ins[x].st_map;
    for (size_t q = 1; q < acc.size(); ++q) acc[q] = mp[acc[q]];
  }
  return acc;
}

std::vector<Violation> InsTree::verify() const {
  std::vector<Violation> v;
  auto addr_of = [&](int x) {
    return st.nodes[x].addr.empty() ? std::string("(root)") : st.nodes[x].addr;
  };

  for (size_t x = 0; x < st.nodes.size(); ++x) {
    const NodeIns& ins = node_ins[x];
    // identities at the root and at non-closed nodes
    if (x == 0 || !st.nodes[x].closed) {
      if (ins.dom_sys != ins.cod_sys)
        v.push_back({"node " + addr_of((int)x) + " should carry an identity"});
    }
    // chaining
    for (int c : st.nodes[x].children) {
      if (node_ins[c].dom_sys != ins.cod_sys)
        v.push_back({"codomain of node " + addr_of((int)x) + " is not the domain of child " + addr_of(c)});
    }
    // monotone model growth
    if (systems[ins.dom_sys].mas.n_states < systems[ins.cod_sys].mas.n_states)
      v.push_back({"in-splitting at node " + addr_of((int)x) + " grows the model"});
    // each map is a valid in-splitting
    InSplitting chk;
    chk.src = systems[ins.dom_sys].mas;
    chk.dst = systems[ins.cod_sys].mas;
    chk.st_map = ins.st_map;
    for (auto& viol : verify_in_splitting(chk))
      v.push_back({"node " + addr_of((int)x) + ": " + viol.message});
    // tower shape: the peeled agents form a subset-ordered chain
    for (size_t i = 0; i + 1 < ins.tower.size(); ++i) {
      const auto& oa = systems[0].mas.obs.at(ins.tower[i]);
      const auto& ob = systems[0].mas.obs.at(ins.tower[i + 1]);
      if (!std::includes(ob.begin(), ob.end(), oa.begin(), oa.end()))
        v.push_back({"tower at node " + addr_of((int)x) + " is not subset-ordered"});
    }
  }

  // root-to-leaf compositions agree on every leaf (and equal the grounding)
  std::vector<int> expect;
  for (size_t x = 0; x < st.nodes.size(); ++x) {
    if (!st.nodes[x].children.empty()) continue;
    std::vector<int> pm = path_map((int)x);
    if (expect.empty()) expect = pm;
    else if (pm != expect)
      v.push_back({"root-to-leaf composition differs at leaf " + addr_of((int)x)});
  }
  if (!expect.empty() && expect != systems[root_sys].ground)
    v.push_back({"root-to-leaf composition is not the state grounding"});
  return v;
}

InsTree build_ins_tree(const Formula& f, const Mas& m, long state_budget) {
  {
    auto viols = validate_mas(m);
    if (!viols.empty()) throw input_error("invalid model: " + viols.front().message);
  }
  NonMixingResult nm = check_nonmixing(f, m);
  if (!nm.ok) throw input_error("non-mixing violation: " + nm.message);
  Builder b(f, m, state_budget);
  return b.run();
}

StateSet pullback_result(const InsTree& t, int node, const StateSet& s) {
  const auto& cod = t.systems[t.node_ins[node].cod_sys].mas;
  if (s.universe_size() != cod.n_states)
    throw input_error("pullback_result: set is not over the node's codomain");
  std::vector<int> pm = t.path_map(node);
  const auto& root = t.systems[t.root_sys].mas;
  StateSet r(root.n_states);
  for (int q = 1; q <= root.n_states; ++q)
    if (s.contains(pm[q])) r.insert(q);
  return r;
}

namespace {

struct Evaluator {
  const InsTree& t;
  long budget;
  std::map<int, StateSet> closed_memo;
  std::map<std::pair<int, std::string>, GammaRel> gamma_cache;

  const GammaRel& gamma(int sys, const std::string& agent) {
    auto key = std::make_pair(sys, agent);
    auto it = gamma_cache.find(key);
    if (it != gamma_cache.end()) return it->second;
    const ChainSystem& s = t.systems[sys];
    GammaRel g;
    if (!s.recipe.empty() && s.recipe[0] == agent) {
      // on a freshly determinized system the relation is information-set
      // equality; no second subset construction needed
      g.n = s.mas.n_states;
      g.row.assign(g.n + 1, StateSet());
      std::map<StateSet, StateSet> by_info;
      for (int u = 1; u <= g.n; ++u) {
        auto [itb, fresh] = by_info.emplace(s.meta[u].info, StateSet(g.n));
        itb->second.insert(u);
      }
      for (int u = 1; u <= g.n; ++u) g.row[u] = by_info.at(s.meta[u].info);
    } else {
      g = compute_gamma(s.mas, agent, budget);
    }
    return gamma_cache.emplace(key, std::move(g)).first->second;
  }

  StateSet eval_any(int x, const std::vector<StateSet>& env, int sys) {
    const SynNode& n = t.st.nodes[x];
    if (n.closed) {
      const NodeIns& ins = t.node_ins[x];
      if (ins.dom_sys != sys) throw internal_error("region system mismatch at a boundary");
      const StateSet& res = eval_closed(x);
      StateSet out(t.systems[sys].mas.n_states);
      for (int q = 1; q <= t.systems[sys].mas.n_states; ++q)
        if (res.contains(ins.st_map[q])) out.insert(q);
      return out;
    }
    return eval_here(x, env, sys);
  }

  const StateSet& eval_closed(int z) {
    auto it = closed_memo.find(z);
    if (it != closed_memo.end()) return it->second;
    int sys = t.region_sys[z];
    std::vector<StateSet> env(t.st.n_vars, StateSet(t.systems[sys].mas.n_states));
    StateSet res = eval_here(z, env, sys);
    return closed_memo.emplace(z, std::move(res)).first->second;
  }

  StateSet eval_here(int x, const std::vector<StateSet>& env, int sys) {
    const SynNode& n = t.st.nodes[x];
    const Mas& sm = t.systems[sys].mas;
    switch (n.kind) {
      case FKind::Top: return StateSet::full(sm.n_states);
      case FKind::Bot: return StateSet(sm.n_states);
      case FKind::Atom:
      case FKind::NegAtom: {
        StateSet r(sm.n_states);
        for (int q = 1; q <= sm.n_states; ++q) {
          bool has = sm.labels[q].count(n.name) > 0;
          if (has == (n.kind == FKind::Atom)) r.insert(q);
        }
        return r;
      }
      case FKind::Var:
        return env[n.var_slot];
      case FKind::And:
        return eval_any(n.children[0], env, sys) & eval_any(n.children[1], env, sys);
      case FKind::Or:
        return eval_any(n.children[0], env, sys) | eval_any(n.children[1], env, sys);
      case FKind::AX:
        return ax_f(sm, eval_any(n.children[0], env, sys));
      case FKind::EX:
        return ex_f(sm, eval_any(n.children[0], env, sys));
      case FKind::K:
        return ka_f(gamma(sys, n.name), eval_any(n.children[0], env, sys));
      case FKind::P:
        return pa_f(gamma(sys, n.name), eval_any(n.children[0], env, sys));
      case FKind::Mu:
      case FKind::Nu: {
        StateSet cur = n.kind == FKind::Mu ? StateSet(sm.n_states) : StateSet::full(sm.n_states);
        for (int i = 0; i <= sm.n_states + 1; ++i) {
          std::vector<StateSet> env2 = env;
          env2[n.var_slot] = cur;
          StateSet next = eval_any(n.children[0], env2, sys);
          if (next == cur) return cur;
          cur = next;
        }
        throw internal_error("checker fixpoint failed to converge within |Q| steps");
      }
    }
    throw internal_error("checker eval: bad kind");
  }
};

} // namespace

CheckResult model_check(const Formula& f, const Mas& m, const CheckOptions& opts) {
  if (!is_closed(f)) throw input_error("model checking requires a closed formula");
  InsTree tree = build_ins_tree(f, m, opts.state_budget);
  {
    auto viols = tree.verify();
    if (!viols.empty())
      throw internal_error("in-splitting tree invariant violated: " + viols.front().message);
  }

  Evaluator ev{tree, opts.state_budget, {}, {}};
  StateSet root = ev.eval_closed(0);

  CheckResult res;
  res.root_model_size = tree.root_model().n_states;
  res.root_set = root.elements();
  const ChainSystem& rs = tree.systems[tree.root_sys];
  res.holds_all = true;
  res.holds_any = false;
  for (int q0 : m.inits) {
    bool ok = root.contains(rs.init_of.at(q0));
    res.per_init[q0] = ok;
    res.holds_all = res.holds_all && ok;
    res.holds_any = res.holds_any || ok;
  }

  if (opts.trace_ins) {
    for (size_t x = 0; x < tree.st.nodes.size(); ++x) {
      if (!tree.st.nodes[x].closed) continue;
      const NodeIns& ins = tree.node_ins[x];
      InsTraceEntry e;
      e.node_addr = tree.st.nodes[x].addr.empty() ? "(root)" : tree.st.nodes[x].addr;
      e.form = print_formula(tree.st.nodes[x].form);
      e.tower = ins.tower;
      e.dom_states = tree.systems[ins.dom_sys].mas.n_states;
      e.cod_states = tree.systems[ins.cod_sys].mas.n_states;
      res.ins_trace.push_back(std::move(e));
    }
  }

  if (opts.witness_sets) {
    for (size_t x = 0; x < tree.st.nodes.size(); ++x) {
      const SynNode& n = tree.st.nodes[x];
      if (!n.closed || n.kind == FKind::Bot) continue;
      if (n.parent >= 0 && tree.st.nodes[n.parent].kind == FKind::Var) continue;
      StateSet over_cod = ev.eval_closed((int)x);
      StateSet pulled = pullback_result(tree, (int)x, over_cod);
      WitnessEntry w;
      w.node_addr = n.addr.empty() ? "(root)" : n.addr;
      w.form = print_formula(n.form);
      w.states = pulled.elements();
      res.witness_sets.push_back(std::move(w));
    }
  }

  if (opts.oracle_depth > 0) {
    res.oracle.ran = true;
    BoundedTree bt(m, opts.oracle_depth, opts.node_budget);
    TreeEvalResult tr = tree_eval_bounded(f, bt, {}, opts.fuel);
    res.oracle.exact_depth = tr.exact_depth;
    if (tr.exact_depth < 1) {
      res.oracle.note = "exactness guard excludes the root; no comparison";
    } else {
      for (int u : bt.nodes_at_level(1)) {
        bool tree_member = tr.set.contains(u);
        bool verdict = res.per_init.at(bt.state_of(u));
        if (tree_member != verdict) res.oracle.agreed = false;
      }
      res.oracle.note = res.oracle.agreed ? "bounded unfolding agrees with the verdict"
                                          : "bounded unfolding disagrees with the verdict";
    }
  }
  return res;
}

std::vector<bool> eval_closed_on_runs(const Formula& f, const Mas& m,
                                      const std::vector<Run>& runs, long state_budget) {
  InsTree tree = build_ins_tree(f, m, state_budget);
  Evaluator ev{tree, state_budget, {}, {}};
  StateSet root = ev.eval_closed(0);
  const ChainSystem& rs = tree.systems[tree.root_sys];
  MasIndex idx(rs.mas);

  std::vector<bool> out;
  out.reserve(runs.size());
  for (const Run& r : runs) {
    if (!is_run(m, r)) throw input_error("eval_closed_on_runs: not a run of the system");
    int cur = rs.init_of.at(r[0]);
    for (size_t i = 1; i < r.size(); ++i) {
      int next = -1;
      for (int s : idx.succ[cur])
        if (rs.ground[s] == r[i]) { next = s; break; }
      if (next < 0) throw internal_error("run lift failed (grounding not out-surjective)");
      cur = next;
    }
    out.push_back(root.contains(cur));
  }
  return out;
}

} // namespace epimu
