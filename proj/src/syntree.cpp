#include "epimu/syntree.hpp"

#include <algorithm>
#include <map>

#include "epimu/errors.hpp"

namespace epimu {

namespace {

int build(SynTree& t, const Formula& f, const std::string& addr, int parent,
          std::map<std::string, int>& slot_of) {
  int id = (int)t.nodes.size();
  t.nodes.push_back({});
  {
    SynNode& n = t.nodes[id];
    n.addr = addr;
    n.form = f;
    n.kind = f->kind;
    n.name = f->name;
    n.parent = parent;
    n.closed = is_closed(f);
  }
  switch (f->kind) {
    case FKind::Top:
    case FKind::Bot:
    case FKind::Atom:
    case FKind::NegAtom:
      break;
    case FKind::Var: {
      // the engineered Top child keeps every variable node above a closed one
      int c = build(t, f_top(), addr + "1", id, slot_of);
      t.nodes[id].children.push_back(c);
      auto it = slot_of.find(f->name);
      t.nodes[id].var_slot = it == slot_of.end() ? -1 : it->second;
      break;
    }
    case FKind::Mu:
    case FKind::Nu: {
      if (!slot_of.count(f->name)) {
        slot_of[f->name] = (int)t.slot_names.size();
        t.slot_names.push_back(f->name);
      }
      t.nodes[id].var_slot = slot_of[f->name];
      int c = build(t, f->left, addr + "1", id, slot_of);
      t.nodes[id].children.push_back(c);
      break;
    }
    case FKind::AX:
    case FKind::EX:
    case FKind::K:
    case FKind::P: {
      int c = build(t, f->left, addr + "1", id, slot_of);
      t.nodes[id].children.push_back(c);
      break;
    }
    case FKind::And:
    case FKind::Or: {
      int c1 = build(t, f->left, addr + "1", id, slot_of);
      t.nodes[id].children.push_back(c1);
      int c2 = build(t, f->right, addr + "2", id, slot_of);
      t.nodes[id].children.push_back(c2);
      break;
    }
  }
  return id;
}

void decorate(SynTree& t, int id) {
  SynNode& n = t.nodes[id];
  for (int c : n.children) decorate(t, c);
  if (!n.closed) {
    std::vector<std::string> acc;
    if (n.kind == FKind::K || n.kind == FKind::P) acc.push_back(n.name);
    for (int c : n.children) {
      const SynNode& ch = t.nodes[c];
      if (!ch.closed)
        acc.insert(acc.end(), ch.ag_ncl.begin(), ch.ag_ncl.end());
    }
    std::sort(acc.begin(), acc.end());
    acc.erase(std::unique(acc.begin(), acc.end()), acc.end());
    n.ag_ncl = std::move(acc);
  }
  n.is_nearest_closed_succ = n.closed && n.parent >= 0;
}

} // namespace

int SynTree::find(const std::string& addr) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].addr == addr) return (int)i;
  return -1;
}

SynTree syntactic_tree(const Formula& f) {
  SynTree t;
  std::map<std::string, int> slot_of;
  build(t, f, "", -1, slot_of);
  t.n_vars = (int)t.slot_names.size();
  decorate(t, 0);
  return t;
}

namespace {
bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}
} // namespace

NonMixingResult check_nonmixing(const SynTree& st, const Mas& m) {
  for (const auto& n : st.nodes)
    if ((n.kind == FKind::K || n.kind == FKind::P) && !m.has_agent(n.name))
      throw input_error("agent not declared in the model: " + n.name);

  for (const auto& n : st.nodes) {
    for (size_t i = 0; i < n.ag_ncl.size(); ++i)
      for (size_t j = i + 1; j < n.ag_ncl.size(); ++j) {
        const auto& a = n.ag_ncl[i];
        const auto& b = n.ag_ncl[j];
        const auto& oa = m.obs.at(a);
        const auto& ob = m.obs.at(b);
        if (!subset(oa, ob) && !subset(ob, oa)) {
          NonMixingResult r;
          r.ok = false;
          r.agent_a = a;
          r.agent_b = b;
          r.node_addr = n.addr;
          r.node_form = print_formula(n.form);
          r.message = "agents " + a + " and " + b +
                      " are both non-closed at node " + (n.addr.empty() ? "(root)" : n.addr) +
                      " but have incomparable observations";
          return r;
        }
      }
  }
  return {};
}

NonMixingResult check_nonmixing(const Formula& f, const Mas& m) {
  SynTree st = syntactic_tree(f);
  return check_nonmixing(st, m);
}

} // namespace epimu
