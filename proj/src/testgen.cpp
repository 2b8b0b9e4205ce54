#include "epimu/testgen.hpp"

#include <algorithm>

#include "epimu/errors.hpp"

namespace epimu {

namespace {
int pick(Rng& rng, int lo, int hi) {
  return lo + (int)(rng() % (uint64_t)(hi - lo + 1));
}
bool coin(Rng& rng, double p) { return (rng() % 1000000) < (uint64_t)(p * 1000000); }
} // namespace

Mas random_mas(Rng& rng, const MasGenSpec& spec) {
  static const char* atom_pool[] = {"p", "q", "r", "s", "t", "u"};
  static const char* agent_pool[] = {"a", "b", "c"};

  Mas m;
  m.n_states = pick(rng, 1, spec.max_states);
  int n_atoms = pick(rng, 1, spec.max_atoms);
  for (int i = 0; i < n_atoms; ++i) m.atoms.push_back(atom_pool[i]);
  int n_agents = pick(rng, spec.min_agents, spec.max_agents);
  for (int i = 0; i < n_agents; ++i) m.agents.push_back(agent_pool[i]);
  for (const auto& ag : m.agents) {
    std::set<std::string> o;
    for (const auto& p : m.atoms)
      if (coin(rng, 0.6)) o.insert(p);
    m.obs[ag] = std::move(o);
  }
  m.labels.assign(m.n_states + 1, {});
  for (int q = 1; q <= m.n_states; ++q)
    for (const auto& p : m.atoms)
      if (coin(rng, 0.5)) m.labels[q].insert(p);

  for (int q = 1; q <= m.n_states; ++q) {
    m.trans.emplace_back(q, pick(rng, 1, m.n_states));  // totality spine
    for (int r = 1; r <= m.n_states; ++r)
      if (coin(rng, spec.trans_density)) m.trans.emplace_back(q, r);
  }
  int n_inits = pick(rng, 1, std::max(1, m.n_states / 3));
  for (int i = 0; i < n_inits; ++i) m.inits.push_back(pick(rng, 1, m.n_states));
  m.normalize();

  // drop unreachable states and renumber densely
  std::vector<char> reach(m.n_states + 1, 0);
  std::vector<int> work = m.inits;
  for (int q : work) reach[q] = 1;
  while (!work.empty()) {
    int q = work.back();
    work.pop_back();
    for (auto& [a, b] : m.trans)
      if (a == q && !reach[b]) { reach[b] = 1; work.push_back(b); }
  }
  std::vector<int> id(m.n_states + 1, 0);
  int next = 1;
  for (int q = 1; q <= m.n_states; ++q)
    if (reach[q]) id[q] = next++;
  Mas out;
  out.n_states = next - 1;
  out.agents = m.agents;
  out.atoms = m.atoms;
  out.obs = m.obs;
  out.labels.assign(out.n_states + 1, {});
  for (int q = 1; q <= m.n_states; ++q)
    if (reach[q]) out.labels[id[q]] = m.labels[q];
  for (auto& [a, b] : m.trans)
    if (reach[a] && reach[b]) out.trans.emplace_back(id[a], id[b]);
  for (int q : m.inits) out.inits.push_back(id[q]);
  out.normalize();
  if (!validate_mas(out).empty()) throw internal_error("random_mas produced an invalid system");
  return out;
}

namespace {
Formula gen_formula(Rng& rng, const Mas& m, int depth, std::vector<std::string>& scope,
                    int& var_counter, bool allow_fix) {
  auto atom = [&]() {
    const std::string& p = m.atoms[pick(rng, 0, (int)m.atoms.size() - 1)];
    return coin(rng, 0.5) ? f_atom(p) : f_neg_atom(p);
  };
  if (depth <= 0) {
    if (!scope.empty() && coin(rng, 0.3))
      return f_var(scope[pick(rng, 0, (int)scope.size() - 1)]);
    return atom();
  }
  int r = pick(rng, 0, allow_fix ? 6 : 4);
  switch (r) {
    case 0:
      return atom();
    case 1:
      return f_and(gen_formula(rng, m, depth - 1, scope, var_counter, allow_fix),
                   gen_formula(rng, m, depth - 1, scope, var_counter, allow_fix));
    case 2:
      return f_or(gen_formula(rng, m, depth - 1, scope, var_counter, allow_fix),
                  gen_formula(rng, m, depth - 1, scope, var_counter, allow_fix));
    case 3:
      return f_ax(gen_formula(rng, m, depth - 1, scope, var_counter, allow_fix));
    case 4:
      return f_ex(gen_formula(rng, m, depth - 1, scope, var_counter, allow_fix));
    default: {
      std::string z = "Z" + std::to_string(++var_counter);
      scope.push_back(z);
      Formula body = gen_formula(rng, m, depth - 1, scope, var_counter, allow_fix);
      scope.pop_back();
      // a fixpoint whose variable never occurs is still closed and valid
      return r == 5 ? f_mu(z, body) : f_nu(z, body);
    }
  }
}
} // namespace

Formula random_plain_formula(Rng& rng, const Mas& m, const FormulaGenSpec& spec) {
  std::vector<std::string> scope;
  int var_counter = 0;
  Formula f = gen_formula(rng, m, pick(rng, 1, spec.max_depth), scope, var_counter,
                          spec.allow_fixpoints);
  // close any stray free variables (cannot appear: scope discipline), but the
  // depth-0 fallback only draws from the scope, so f is closed by construction
  if (!is_closed(f)) throw internal_error("random_plain_formula produced an open formula");
  return f;
}

InSplitting random_split(Rng& rng, const Mas& m) {
  // candidate states: enough in-interest to give both copies an incoming edge
  // or an initial marking
  std::vector<int> cands;
  for (int q = 1; q <= m.n_states; ++q) {
    int fan = (int)m.predecessors(q).size() +
              (std::find(m.inits.begin(), m.inits.end(), q) != m.inits.end() ? 1 : 0);
    int in_edges = 0;
    for (auto& [a, b] : m.trans)
      if (b == q) ++in_edges;
    (void)fan;
    if (in_edges + (std::find(m.inits.begin(), m.inits.end(), q) != m.inits.end() ? 1 : 0) >= 2)
      cands.push_back(q);
  }
  if (cands.empty()) return identity_splitting(m);
  int s = cands[pick(rng, 0, (int)cands.size() - 1)];
  int twin = m.n_states + 1;

  Mas src;
  src.n_states = m.n_states + 1;
  src.agents = m.agents;
  src.atoms = m.atoms;
  src.obs = m.obs;
  src.labels = m.labels;
  src.labels.push_back(m.labels[s]);

  // out-edges are copied to the twin; in-edges are partitioned so that each
  // copy keeps at least one incoming edge or the initial marking
  std::vector<std::pair<int, int>> in_edges;
  for (auto& [a, b] : m.trans) {
    if (b == s) in_edges.emplace_back(a, b);
    src.trans.emplace_back(a, b);
    if (a == s) src.trans.emplace_back(twin, b);
  }
  bool s_init = std::find(m.inits.begin(), m.inits.end(), s) != m.inits.end();
  int slots = (int)in_edges.size() + (s_init ? 1 : 0);
  std::vector<int> assign(slots);  // 0 -> keep s, 1 -> twin
  bool ok = false;
  while (!ok) {
    int ones = 0;
    for (int& x : assign) {
      x = pick(rng, 0, 1);
      ones += x;
    }
    ok = ones > 0 && ones < slots;
  }
  for (size_t i = 0; i < in_edges.size(); ++i) {
    if (assign[i] == 1) {
      auto it = std::find(src.trans.begin(), src.trans.end(), in_edges[i]);
      *it = {in_edges[i].first, twin};
    }
  }
  src.inits = m.inits;
  if (s_init && assign[slots - 1] == 1)
    std::replace(src.inits.begin(), src.inits.end(), s, twin);
  src.normalize();

  InSplitting x;
  x.src = src;
  x.dst = m;
  x.st_map.resize(src.n_states + 1);
  for (int q = 1; q <= m.n_states; ++q) x.st_map[q] = q;
  x.st_map[twin] = s;

  if (!validate_mas(src).empty() || !verify_in_splitting(x).empty())
    return identity_splitting(m);  // split starved one copy of reachability
  return x;
}

} // namespace epimu
