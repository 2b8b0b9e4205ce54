#include "epimu/distinction.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "epimu/errors.hpp"
#include "epimu/finitary.hpp"

namespace epimu {

InSplitting identity_splitting(const Mas& m) {
  InSplitting x;
  x.src = m;
  x.dst = m;
  x.st_map.resize(m.n_states + 1);
  for (int q = 1; q <= m.n_states; ++q) x.st_map[q] = q;
  return x;
}

std::vector<Violation> verify_in_splitting(const InSplitting& x) {
  std::vector<Violation> v;
  const Mas& s = x.src;
  const Mas& d = x.dst;
  if (s.atoms != d.atoms || s.agents != d.agents || s.obs != d.obs)
    v.push_back({"source and target systems disagree on atoms, agents or observations"});
  if ((int)x.st_map.size() != s.n_states + 1) {
    v.push_back({"state map size mismatch"});
    return v;
  }
  for (int q = 1; q <= s.n_states; ++q)
    if (x.st_map[q] < 1 || x.st_map[q] > d.n_states) {
      v.push_back({"state map image out of range at state " + std::to_string(q)});
      return v;
    }

  // surjectivity of the state map
  std::vector<char> hit(d.n_states + 1, 0);
  for (int q = 1; q <= s.n_states; ++q) hit[x.st_map[q]] = 1;
  for (int q = 1; q <= d.n_states; ++q)
    if (!hit[q]) v.push_back({"state map not surjective: target state " + std::to_string(q) + " uncovered"});

  MasIndex si(s), di(d);
  for (int q = 1; q <= s.n_states; ++q) {
    int qq = x.st_map[q];
    if (s.labels[q] != d.labels[qq])
      v.push_back({"labels not preserved at state " + std::to_string(q)});
    if ((int)si.succ[q].size() != (int)di.succ[qq].size())
      v.push_back({"out-degree not preserved at state " + std::to_string(q)});
    // transitions land in dst, and map one-to-one onto the successors of the image
    std::vector<int> img;
    for (int r : si.succ[q]) {
      if (!std::binary_search(d.trans.begin(), d.trans.end(), std::make_pair(qq, x.st_map[r])))
        v.push_back({"transition " + std::to_string(q) + "->" + std::to_string(r) +
                     " has no image transition"});
      img.push_back(x.st_map[r]);
    }
    std::sort(img.begin(), img.end());
    if (std::adjacent_find(img.begin(), img.end()) != img.end())
      v.push_back({"transition map not injective on successors of state " + std::to_string(q)});
    if (img != di.succ[qq] && (int)si.succ[q].size() == (int)di.succ[qq].size() &&
        std::adjacent_find(img.begin(), img.end()) == img.end()) {
      v.push_back({"transition map does not cover successors of target state " + std::to_string(qq)});
    }
  }

  // initial states map onto initial states
  std::vector<int> init_img;
  for (int q : s.inits) init_img.push_back(x.st_map[q]);
  std::sort(init_img.begin(), init_img.end());
  init_img.erase(std::unique(init_img.begin(), init_img.end()), init_img.end());
  if (init_img != d.inits)
    v.push_back({"initial states do not map onto target initial states"});
  return v;
}

InSplitting compose(const InSplitting& outer, const InSplitting& inner) {
  if (!(inner.dst == outer.src))
    throw input_error("compose: inner codomain differs from outer domain");
  InSplitting r;
  r.src = inner.src;
  r.dst = outer.dst;
  r.st_map.resize(inner.src.n_states + 1);
  for (int q = 1; q <= inner.src.n_states; ++q)
    r.st_map[q] = outer.st_map[inner.st_map[q]];
  return r;
}

StateSet preimage(const InSplitting& x, const StateSet& s) {
  if (s.universe_size() != x.dst.n_states)
    throw input_error("preimage: set is not over the target system");
  StateSet r(x.src.n_states);
  for (int q = 1; q <= x.src.n_states; ++q)
    if (s.contains(x.st_map[q])) r.insert(q);
  return r;
}

StateSet image(const InSplitting& x, const StateSet& s) {
  if (s.universe_size() != x.src.n_states)
    throw input_error("image: set is not over the source system");
  StateSet r(x.dst.n_states);
  for (int q : s.elements()) r.insert(x.st_map[q]);
  return r;
}

Distinction a_distinction(const Mas& m, const std::string& a, long state_budget) {
  if (!m.has_agent(a)) throw input_error("unknown agent: " + a);
  MasIndex idx(m);
  const auto& code = idx.obs_code.at(a);

  std::map<std::pair<int, StateSet>, int> id_of;
  std::vector<std::pair<int, StateSet>> disc;  // discovery order
  std::deque<int> work;

  auto intern = [&](int base, const StateSet& info) {
    auto key = std::make_pair(base, info);
    auto it = id_of.find(key);
    if (it != id_of.end()) return it->second;
    int id = (int)disc.size() + 1;
    if ((long)id > state_budget)
      throw budget_error("a_distinction: state budget exceeded (" + std::to_string(state_budget) + ")");
    id_of.emplace(key, id);
    disc.push_back(key);
    work.push_back(id);
    return id;
  };

  for (int q0 : m.inits) {
    StateSet info(m.n_states);
    for (int r : m.inits)
      if (code[r] == code[q0]) info.insert(r);
    intern(q0, info);
  }

  std::vector<std::pair<int, int>> trans;
  while (!work.empty()) {
    int u = work.front();
    work.pop_front();
    auto [q, S] = disc[u - 1];
    for (int r : idx.succ[q]) {
      StateSet R(m.n_states);
      for (int s : S.elements())
        for (int rp : idx.succ[s])
          if (code[rp] == code[r]) R.insert(rp);
      int v = intern(r, R);
      trans.emplace_back(u, v);
    }
  }

  Distinction d;
  d.mas.n_states = (int)disc.size();
  d.mas.agents = m.agents;
  d.mas.atoms = m.atoms;
  d.mas.obs = m.obs;
  d.mas.labels.assign(d.mas.n_states + 1, {});
  d.mas.trans = std::move(trans);
  d.meta.assign(d.mas.n_states + 1, {});
  d.chi.st_map.assign(d.mas.n_states + 1, 0);
  for (int i = 1; i <= d.mas.n_states; ++i) {
    d.mas.labels[i] = m.labels[disc[i - 1].first];
    d.meta[i] = {disc[i - 1].first, disc[i - 1].second};
    d.chi.st_map[i] = disc[i - 1].first;
  }
  for (int i = 0; i < (int)m.inits.size(); ++i) d.mas.inits.push_back(i + 1);
  d.mas.normalize();
  d.chi.src = d.mas;
  d.chi.dst = m;
  return d;
}

bool is_a_distinguished(const Mas& m, const std::string& a, long state_budget) {
  GammaRel g = compute_gamma(m, a, state_budget);
  MasIndex idx(m);
  const auto& code = idx.obs_code.at(a);
  int n = m.n_states;
  for (int q = 1; q <= n; ++q)
    if (!g.row[q].contains(q)) return false;  // reflexive
  for (int q = 1; q <= n; ++q)
    for (int r : g.row[q].elements()) {
      if (!g.row[r].contains(q)) return false;        // symmetric
      if (!g.row[r].subset_of(g.row[q])) return false; // transitive
    }
  // congruence w.r.t. observation-matching transitions
  for (int q = 1; q <= n; ++q)
    for (int r : g.row[q].elements())
      for (int qp : idx.succ[q])
        for (int rp : idx.succ[r])
          if (code[qp] == code[rp] && !g.row[qp].contains(rp)) return false;
  return true;
}

} // namespace epimu
