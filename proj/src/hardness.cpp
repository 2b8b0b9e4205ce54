#include "epimu/hardness.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

#include "epimu/checker.hpp"
#include "epimu/errors.hpp"
#include "epimu/oracle.hpp"

namespace epimu {

namespace {
SfExpr sfnode(SfKind k, std::string sym, SfExpr l = nullptr, SfExpr r = nullptr) {
  auto n = std::make_shared<SfNode>();
  n->kind = k;
  n->sym = std::move(sym);
  n->left = std::move(l);
  n->right = std::move(r);
  return n;
}
} // namespace

SfExpr sf_empty() { return sfnode(SfKind::Empty, ""); }
SfExpr sf_eps() { return sfnode(SfKind::Eps, ""); }
SfExpr sf_sym(const std::string& s) { return sfnode(SfKind::Sym, s); }
SfExpr sf_cat(SfExpr a, SfExpr b) { return sfnode(SfKind::Cat, "", std::move(a), std::move(b)); }
SfExpr sf_alt(SfExpr a, SfExpr b) { return sfnode(SfKind::Alt, "", std::move(a), std::move(b)); }
SfExpr sf_compl(SfExpr a) { return sfnode(SfKind::Compl, "", std::move(a)); }

std::string print_sf(const SfExpr& e) {
  switch (e->kind) {
    case SfKind::Empty: return "empty";
    case SfKind::Eps: return "eps";
    case SfKind::Sym: return e->sym;
    case SfKind::Cat: return "(" + print_sf(e->left) + " . " + print_sf(e->right) + ")";
    case SfKind::Alt: return "(" + print_sf(e->left) + " + " + print_sf(e->right) + ")";
    case SfKind::Compl: return "~(" + print_sf(e->left) + ")";
  }
  return "?";
}

namespace {
bool member_rec(const SfExpr& e, const Word& w, int lo, int hi) {
  switch (e->kind) {
    case SfKind::Empty: return false;
    case SfKind::Eps: return lo == hi;
    case SfKind::Sym: return hi - lo == 1 && w[lo] == e->sym;
    case SfKind::Alt:
      return member_rec(e->left, w, lo, hi) || member_rec(e->right, w, lo, hi);
    case SfKind::Cat:
      for (int mid = lo; mid <= hi; ++mid)
        if (member_rec(e->left, w, lo, mid) && member_rec(e->right, w, mid, hi)) return true;
      return false;
    case SfKind::Compl:
      return !member_rec(e->left, w, lo, hi);
  }
  return false;
}
} // namespace

bool sf_membership(const SfExpr& e, const Word& w) {
  return member_rec(e, w, 0, (int)w.size());
}

std::vector<std::string> sf_symbols(const SfExpr& e) {
  std::vector<std::string> out;
  std::vector<SfExpr> work{e};
  while (!work.empty()) {
    SfExpr x = work.back();
    work.pop_back();
    if (x->kind == SfKind::Sym) out.push_back(x->sym);
    if (x->left) work.push_back(x->left);
    if (x->right) work.push_back(x->right);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void validate_context_star_free(const SfExpr& e) {
  if (e->left) validate_context_star_free(e->left);
  if (e->right) validate_context_star_free(e->right);
  if (e->kind == SfKind::Compl && sf_membership(e->left, {}))
    throw input_error("complemented subexpression accepts the empty word: " + print_sf(e->left));
}

// ---------------------------------------------------------------------------
// Expression files

namespace {

struct SfxParser {
  std::map<std::string, SfExpr> defs;
  std::map<std::string, std::pair<std::vector<std::string>, SfExpr>> param_defs;
  std::vector<std::string> param_order;  // definition order of parameterized defs
  std::vector<std::string> alphabet;
  int lineno = 0;

  [[noreturn]] void fail(const std::string& msg) { throw parse_error(msg, lineno, 1); }

  struct ExprParser {
    SfxParser& owner;
    std::vector<std::string> toks;
    size_t i = 0;
    const std::map<std::string, SfExpr>* locals;

    bool at(const std::string& s) const { return i < toks.size() && toks[i] == s; }
    void expect(const std::string& s) {
      if (!at(s)) owner.fail("expected '" + s + "'");
      ++i;
    }

    SfExpr parse() {
      SfExpr e = alt();
      if (i != toks.size()) owner.fail("trailing tokens in expression");
      return e;
    }
    SfExpr alt() {
      SfExpr e = cat();
      while (at("+")) { ++i; e = sf_alt(e, cat()); }
      return e;
    }
    SfExpr cat() {
      SfExpr e = atom();
      while (at(".")) { ++i; e = sf_cat(e, atom()); }
      return e;
    }
    SfExpr atom() {
      if (at("~")) { ++i; return sf_compl(atom()); }
      if (at("(")) {
        ++i;
        SfExpr e = alt();
        expect(")");
        return e;
      }
      if (i >= toks.size()) owner.fail("expression ends unexpectedly");
      std::string name = toks[i++];
      if (name == "eps") return sf_eps();
      if (name == "empty") return sf_empty();
      if (at("(")) {  // application of a parameterized definition
        ++i;
        std::vector<SfExpr> args;
        if (!at(")")) {
          args.push_back(alt());
          while (at(",")) { ++i; args.push_back(alt()); }
        }
        expect(")");
        return owner.apply(name, args);
      }
      if (locals && locals->count(name)) return locals->at(name);
      if (owner.defs.count(name)) return owner.defs.at(name);
      return sf_sym(name);
    }
  };

  SfExpr parse_expr(const std::vector<std::string>& toks,
                    const std::map<std::string, SfExpr>* locals) {
    ExprParser p{*this, toks, 0, locals};
    return p.parse();
  }

  SfExpr apply(const std::string& name, const std::vector<SfExpr>& args) {
    auto it = param_defs.find(name);
    if (it == param_defs.end()) fail("unknown parameterized definition: " + name);
    const auto& [params, body] = it->second;
    if (params.size() != args.size())
      fail("definition " + name + " takes " + std::to_string(params.size()) + " argument(s)");
    return substitute(body, params, args);
  }

  static SfExpr substitute(const SfExpr& e, const std::vector<std::string>& params,
                           const std::vector<SfExpr>& args) {
    if (e->kind == SfKind::Sym) {
      for (size_t k = 0; k < params.size(); ++k)
        if (e->sym == params[k]) return args[k];
      return e;
    }
    SfExpr l = e->left ? substitute(e->left, params, args) : nullptr;
    SfExpr r = e->right ? substitute(e->right, params, args) : nullptr;
    return sfnode(e->kind, e->sym, l, r);
  }
};

std::vector<std::string> sfx_tokens(const std::string& s) {
  std::vector<std::string> toks;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (isspace((unsigned char)c)) { ++i; continue; }
    if (isalnum((unsigned char)c) || c == '_') {
      std::string t;
      while (i < s.size() && (isalnum((unsigned char)s[i]) || s[i] == '_')) t += s[i++];
      toks.push_back(t);
      continue;
    }
    if (std::string("()+.~,=").find(c) != std::string::npos) {
      toks.push_back(std::string(1, c));
      ++i;
      continue;
    }
    throw input_error(std::string("bad character in expression file: '") + c + "'");
  }
  return toks;
}

} // namespace

SfxFile parse_sfx(const std::string& text) {
  SfxParser p;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++p.lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto toks = sfx_tokens(raw);
    auto eq = std::find(toks.begin(), toks.end(), "=");
    if (eq == toks.end()) p.fail("expected 'name = expression'");
    std::vector<std::string> head(toks.begin(), eq);
    std::vector<std::string> body(eq + 1, toks.end());
    if (head.empty()) p.fail("missing definition name");
    std::string name = head[0];
    if (name == "alphabet") {
      if (head.size() != 1) p.fail("malformed alphabet line");
      p.alphabet = body;
      continue;
    }
    if (head.size() == 1) {
      p.defs[name] = p.parse_expr(body, nullptr);
    } else {
      // parameterized: NAME ( p1 , p2 ... )
      if (head.size() < 4 || head[1] != "(" || head.back() != ")")
        p.fail("malformed parameterized definition head");
      std::vector<std::string> params;
      for (size_t k = 2; k + 1 < head.size(); ++k) {
        if (head[k] == ",") continue;
        params.push_back(head[k]);
      }
      std::map<std::string, SfExpr> locals;
      for (const auto& q : params) locals[q] = sf_sym(q);
      p.param_defs[name] = {params, p.parse_expr(body, &locals)};
      p.param_order.push_back(name);
    }
  }

  SfxFile out;
  if (p.defs.count("R")) {
    out.expr = p.defs.at("R");
  } else if (!p.param_order.empty()) {
    const std::string& cname = p.param_order.back();
    const auto& [params, body] = p.param_defs.at(cname);
    std::vector<SfExpr> args;
    for (size_t k = 0; k < params.size(); ++k) {
      std::string fname = params.size() == 1 ? "F" : "F" + std::to_string(k + 1);
      if (!p.defs.count(fname))
        throw input_error("expression file defines " + cname + " but not " + fname);
      args.push_back(sf_compl(p.defs.at(fname)));
    }
    out.expr = p.substitute(body, params, args);
  } else {
    throw input_error("expression file defines neither R nor a parameterized context");
  }
  validate_context_star_free(out.expr);
  if (!p.alphabet.empty()) {
    out.alphabet = p.alphabet;
    for (const auto& s : sf_symbols(out.expr))
      if (std::find(out.alphabet.begin(), out.alphabet.end(), s) == out.alphabet.end())
        throw input_error("symbol outside the declared alphabet: " + s);
  } else {
    out.alphabet = sf_symbols(out.expr);
  }
  return out;
}

SfxFile parse_sfx_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open expression file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_sfx(ss.str());
}

// ---------------------------------------------------------------------------
// Position automaton

namespace {

struct Positions {
  std::vector<std::string> sym;  // 1-based position labels
  bool nullable = false;
  std::vector<int> first, last;
  std::vector<std::vector<int>> follow;  // per position
};

struct Glushkov {
  Positions pos;

  struct Info {
    bool nullable;
    std::vector<int> first, last;
  };

  Info build(const SfExpr& e) {
    switch (e->kind) {
      case SfKind::Empty: return {false, {}, {}};
      case SfKind::Eps: return {true, {}, {}};
      case SfKind::Sym: {
        pos.sym.push_back(e->sym);
        pos.follow.push_back({});
        int p = (int)pos.sym.size();
        return {false, {p}, {p}};
      }
      case SfKind::Alt: {
        Info l = build(e->left), r = build(e->right);
        Info out;
        out.nullable = l.nullable || r.nullable;
        out.first = l.first;
        out.first.insert(out.first.end(), r.first.begin(), r.first.end());
        out.last = l.last;
        out.last.insert(out.last.end(), r.last.begin(), r.last.end());
        return out;
      }
      case SfKind::Cat: {
        Info l = build(e->left), r = build(e->right);
        for (int p : l.last)
          for (int q : r.first) pos.follow[p - 1].push_back(q);
        Info out;
        out.nullable = l.nullable && r.nullable;
        out.first = l.first;
        if (l.nullable) out.first.insert(out.first.end(), r.first.begin(), r.first.end());
        out.last = r.last;
        if (r.nullable) out.last.insert(out.last.end(), l.last.begin(), l.last.end());
        return out;
      }
      case SfKind::Compl:
        throw input_error("cannot build an automaton for a complemented expression");
    }
    throw internal_error("glushkov: bad kind");
  }
};

} // namespace

Moore regex_to_moore(const SfExpr& e, const std::string& hole) {
  Glushkov g;
  auto info = g.build(e);
  Moore a;
  a.n = (int)g.pos.sym.size() + 1;  // state 1 = initial, positions shift by 1
  a.label.assign(a.n + 1, "");
  for (int p = 1; p <= (int)g.pos.sym.size(); ++p) a.label[p + 1] = g.pos.sym[p - 1];
  for (int p : info.first) a.trans.emplace_back(1, p + 1);
  for (int p = 1; p <= (int)g.pos.sym.size(); ++p)
    for (int q : g.pos.follow[p - 1]) a.trans.emplace_back(p + 1, q + 1);
  std::sort(a.trans.begin(), a.trans.end());
  a.trans.erase(std::unique(a.trans.begin(), a.trans.end()), a.trans.end());
  for (int p : info.last) a.finals.push_back(p + 1);
  if (info.nullable) a.finals.push_back(1);
  std::sort(a.finals.begin(), a.finals.end());
  a.finals.erase(std::unique(a.finals.begin(), a.finals.end()), a.finals.end());
  if (hole.empty()) return a;

  int hole_q = 0;
  for (int q = 1; q <= a.n; ++q)
    if (a.label[q] == hole) {
      if (hole_q) throw input_error("hole symbol occurs more than once: " + hole);
      hole_q = q;
    }
  if (!hole_q) return a;

  // split by hole traversal: (q, 0) not yet passed, (q, 1) passed; only the
  // passed copy of the hole state exists
  Moore b;
  std::map<std::pair<int, int>, int> id;
  auto intern = [&](int q, int passed) {
    auto key = std::make_pair(q, passed);
    auto it = id.find(key);
    if (it != id.end()) return it->second;
    int v = ++b.n;
    id[key] = v;
    b.label.resize(b.n + 1);
    b.label[v] = a.label[q];
    return v;
  };
  intern(1, 0);  // the initial state is never the hole
  std::vector<char> fin(a.n + 1, 0);
  for (int f : a.finals) fin[f] = 1;
  std::deque<std::pair<int, int>> work{{1, 0}};
  std::set<std::pair<int, int>> seen{{1, 0}};
  while (!work.empty()) {
    auto [q, passed] = work.front();
    work.pop_front();
    int u = id.at({q, passed});
    for (auto& [x, y] : a.trans) {
      if (x != q) continue;
      int p2 = (y == hole_q) ? 1 : passed;
      int v = intern(y, p2);
      b.trans.emplace_back(u, v);
      if (seen.insert({y, p2}).second) work.emplace_back(y, p2);
    }
  }
  std::sort(b.trans.begin(), b.trans.end());
  b.trans.erase(std::unique(b.trans.begin(), b.trans.end()), b.trans.end());
  for (auto& [key, v] : id) {
    if (key.first == hole_q) b.x_state = v;
    if (fin[key.first]) {
      b.finals.push_back(v);
      (key.second ? b.finals_x : b.finals_not_x).push_back(v);
    }
  }
  std::sort(b.finals.begin(), b.finals.end());
  std::sort(b.finals_x.begin(), b.finals_x.end());
  std::sort(b.finals_not_x.begin(), b.finals_not_x.end());
  return b;
}

// ---------------------------------------------------------------------------
// Reduction

namespace {

/// Working graph during assembly; finalized by reachability pruning, a sink
/// for dead ends, and dense renumbering in construction order.
struct Proto {
  std::vector<std::set<std::string>> label;  // 0-based internal ids
  std::vector<std::vector<int>> out;
  std::vector<int> inits;

  int add(std::set<std::string> lab) {
    label.push_back(std::move(lab));
    out.push_back({});
    return (int)label.size() - 1;
  }
  void edge(int a, int b) { out[a].push_back(b); }
};

Mas finalize(Proto& g, const std::vector<std::string>& agents,
             const std::vector<std::string>& atoms,
             const std::map<std::string, std::set<std::string>>& obs) {
  int n = (int)g.label.size();
  std::vector<char> reach(n, 0);
  std::deque<int> work;
  for (int q : g.inits)
    if (!reach[q]) { reach[q] = 1; work.push_back(q); }
  while (!work.empty()) {
    int q = work.front();
    work.pop_front();
    for (int r : g.out[q])
      if (!reach[r]) { reach[r] = 1; work.push_back(r); }
  }
  bool dead_end = false;
  for (int q = 0; q < n; ++q)
    if (reach[q] && g.out[q].empty()) dead_end = true;
  int sink = -1;
  if (dead_end) {
    sink = g.add({});
    g.edge(sink, sink);
    reach.push_back(1);
    for (int q = 0; q < n; ++q)
      if (reach[q] && g.out[q].empty()) g.edge(q, sink);
    n = (int)g.label.size();
  }

  std::vector<int> id(n, 0);
  int next = 1;
  for (int q = 0; q < n; ++q)
    if (reach[q]) id[q] = next++;

  Mas m;
  m.n_states = next - 1;
  m.agents = agents;
  m.atoms = atoms;
  for (const auto& a : agents) m.obs[a] = obs.count(a) ? obs.at(a) : std::set<std::string>{};
  m.labels.assign(m.n_states + 1, {});
  for (int q = 0; q < n; ++q) {
    if (!reach[q]) continue;
    m.labels[id[q]] = g.label[q];
    for (int r : g.out[q])
      if (reach[r]) m.trans.emplace_back(id[q], id[r]);
  }
  for (int q : g.inits)
    if (reach[q]) m.inits.push_back(id[q]);
  m.normalize();
  return m;
}

/// Renames the surface-alphabet lineage of an embedded machine one level in:
/// every atom not starting with "end" gets the hole mark inserted after its
/// base symbol. End markers stay fixed; observer sets follow their atoms.
std::string shift_atom(const std::string& atom, const std::string& mark) {
  if (atom.rfind("end", 0) == 0) return atom;
  auto q = atom.find('\'');
  if (q == std::string::npos) return atom + mark;
  return atom.substr(0, q) + mark + atom.substr(q);
}

struct RedBuilder {
  std::vector<std::string> sigma;
  long budget;
  int next_id = 0;

  struct Built {
    Proto g;
    std::vector<std::string> agents, atoms;
    std::map<std::string, std::set<std::string>> obs;
    Formula phi;
    std::string end_atom;
    std::vector<std::string> hole_agents, hole_endx;
  };

  void add_atom(std::vector<std::string>& atoms, const std::string& a) {
    if (std::find(atoms.begin(), atoms.end(), a) == atoms.end()) atoms.push_back(a);
  }

  /// Maximal complemented subexpressions, left to right; the context is the
  /// expression with each replaced by a unique hole marker.
  void split_holes(const SfExpr& e, std::vector<SfExpr>& holes, SfExpr& context) {
    if (e->kind == SfKind::Compl) {
      holes.push_back(e->left);
      context = sf_sym("\thole" + std::to_string(holes.size()));
      return;
    }
    if (!e->left) { context = e; return; }
    SfExpr l, r;
    split_holes(e->left, holes, l);
    if (e->right) split_holes(e->right, holes, r);
    context = sfnode(e->kind, e->sym, l, r);
  }

  Built build(const SfExpr& expr) {
    std::vector<SfExpr> holes;
    SfExpr context;
    split_holes(expr, holes, context);
    int id = next_id++;
    std::string end_atom = "end" + std::to_string(id);

    Moore aut = regex_to_moore(context);

    Built b;
    b.atoms = sigma;
    add_atom(b.atoms, end_atom);
    b.end_atom = end_atom;

    if (holes.empty()) {
      // plain automaton plus an absorbing end state behind the finals
      std::vector<int> st(aut.n + 1, 0);
      for (int q = 1; q <= aut.n; ++q)
        st[q] = b.g.add(aut.label[q].empty() ? std::set<std::string>{}
                                             : std::set<std::string>{aut.label[q]});
      int qf = b.g.add({end_atom});
      b.g.edge(qf, qf);
      for (auto& [x, y] : aut.trans) b.g.edge(st[x], st[y]);
      for (int f : aut.finals) b.g.edge(st[f], qf);
      b.g.inits = {st[1]};
      b.phi = f_top();
      return b;
    }

    // hole markers sit at exactly one automaton position each
    std::vector<int> hole_pos(holes.size(), -1);
    for (int q = 1; q <= aut.n; ++q)
      for (size_t h = 0; h < holes.size(); ++h)
        if (aut.label[q] == "\thole" + std::to_string(h + 1)) {
          if (hole_pos[h] != -1) throw internal_error("hole marker duplicated");
          hole_pos[h] = q;
        }

    // monitor: track which holes a path has traversed
    std::map<std::pair<int, unsigned>, int> mon_id;
    std::vector<std::pair<int, unsigned>> mon;
    std::deque<int> work;
    std::vector<std::vector<int>> aut_succ(aut.n + 1);
    for (auto& [x, y] : aut.trans) aut_succ[x].push_back(y);
    auto hole_of = [&](int q) {
      for (size_t h = 0; h < holes.size(); ++h)
        if (hole_pos[h] == q) return (int)h;
      return -1;
    };
    auto intern = [&](int q, unsigned mask) {
      auto key = std::make_pair(q, mask);
      auto it = mon_id.find(key);
      if (it != mon_id.end()) return it->second;
      int i = (int)mon.size();
      mon_id[key] = i;
      mon.push_back(key);
      work.push_back(i);
      return i;
    };
    intern(1, 0);
    std::vector<std::vector<int>> mon_succ;
    while (!work.empty()) {
      int u = work.front();
      work.pop_front();
      auto [q, mask] = mon[u];
      if ((int)mon_succ.size() <= u) mon_succ.resize(u + 1);
      for (int r : aut_succ[q]) {
        int h = hole_of(r);
        unsigned mask2 = h >= 0 ? (mask | (1u << h)) : mask;
        mon_succ[u].push_back(intern(r, mask2));
      }
    }
    mon_succ.resize(mon.size());

    // per-hole inner machines and naming
    std::vector<Built> inner(holes.size());
    std::vector<std::string> marks(holes.size());
    for (size_t h = 0; h < holes.size(); ++h) {
      if (sf_membership(holes[h], {}))
        throw input_error("complemented subexpression accepts the empty word");
      inner[h] = build(holes[h]);
      marks[h] = h == 0 ? "'" : "'" + std::to_string(h + 1);
    }

    b.agents.clear();
    std::map<std::string, std::set<std::string>> obs;
    std::vector<std::string> hole_agent(holes.size());
    std::vector<std::string> hole_endx(holes.size());
    for (size_t h = 0; h < holes.size(); ++h) {
      for (const auto& ag : inner[h].agents) {
        b.agents.push_back(ag);
        std::set<std::string> o;
        for (const auto& p : inner[h].obs.at(ag)) o.insert(shift_atom(p, marks[h]));
        obs[ag] = std::move(o);
      }
      hole_agent[h] = "obs" + std::to_string(id) + "_" + std::to_string(h + 1);
      std::set<std::string> o;
      for (const auto& s : sigma) o.insert(s + marks[h]);
      obs[hole_agent[h]] = std::move(o);
      b.agents.push_back(hole_agent[h]);
      hole_endx[h] = "endx" + std::to_string(id) + "_" + std::to_string(h + 1);
      for (const auto& p : inner[h].atoms) add_atom(b.atoms, shift_atom(p, marks[h]));
      add_atom(b.atoms, hole_endx[h]);
    }
    b.obs = obs;
    b.hole_agents = hole_agent;
    b.hole_endx = hole_endx;

    // monitor states into the working graph
    std::vector<int> st(mon.size());
    for (size_t u = 0; u < mon.size(); ++u) {
      const std::string& lab = aut.label[mon[u].first];
      std::set<std::string> ls;
      if (!lab.empty() && lab[0] != '\t') ls.insert(lab);
      st[u] = b.g.add(std::move(ls));
    }
    for (size_t u = 0; u < mon.size(); ++u)
      for (int v : mon_succ[u]) b.g.edge(st[u], st[v]);
    b.g.inits = {st[mon_id.at({1, 0})]};

    // end states, one per traversal mask occurring at a final state
    std::vector<char> is_final(aut.n + 1, 0);
    for (int f : aut.finals) is_final[f] = 1;
    std::map<unsigned, int> end_of_mask;
    for (size_t u = 0; u < mon.size(); ++u) {
      auto [q, mask] = mon[u];
      if (!is_final[q]) continue;
      auto it = end_of_mask.find(mask);
      if (it == end_of_mask.end()) {
        std::set<std::string> ls{end_atom};
        for (size_t h = 0; h < holes.size(); ++h)
          if (mask & (1u << h)) ls.insert(hole_endx[h]);
        int e = b.g.add(std::move(ls));
        b.g.edge(e, e);
        it = end_of_mask.emplace(mask, e).first;
      }
      b.g.edge(st[u], it->second);
    }

    // replace each hole copy by a block of paired-label states; predecessors
    // bypass the block directly so the hole can also carry the empty word
    for (size_t h = 0; h < holes.size(); ++h) {
      for (size_t u = 0; u < mon.size(); ++u) {
        if (mon[u].first != hole_pos[h]) continue;
        int copy = st[u];
        std::vector<int> preds, succs = b.g.out[copy];
        for (size_t v = 0; v < b.g.out.size(); ++v) {
          if ((int)v == copy) continue;
          for (int w : b.g.out[v])
            if (w == copy) { preds.push_back((int)v); break; }
        }
        std::vector<int> block;
        for (const auto& s : sigma)
          block.push_back(b.g.add({s, s + marks[h]}));
        for (int x : block)
          for (int y : block) b.g.edge(x, y);
        for (int p : preds) {
          b.g.out[p].erase(std::remove(b.g.out[p].begin(), b.g.out[p].end(), copy),
                           b.g.out[p].end());
          for (int x : block) b.g.edge(p, x);
          for (int r : succs) b.g.edge(p, r);  // empty hole content
        }
        for (int x : block)
          for (int r : succs) b.g.edge(x, r);
        b.g.out[copy].clear();  // now unreachable; pruned at finalize
      }

      // the inner machine, alphabet shifted, behind a looping entry state;
      // its own initial states stay initial so that an equivalent inner run
      // can also start emitting immediately (hole at the first position)
      int entry = b.g.add({});
      b.g.edge(entry, entry);
      int base = (int)b.g.label.size();
      for (size_t q = 0; q < inner[h].g.label.size(); ++q) {
        std::set<std::string> ls;
        for (const auto& p : inner[h].g.label[q]) ls.insert(shift_atom(p, marks[h]));
        b.g.add(std::move(ls));
      }
      for (size_t q = 0; q < inner[h].g.label.size(); ++q)
        for (int r : inner[h].g.out[q]) b.g.edge(base + (int)q, base + r);
      for (int q0 : inner[h].g.inits) {
        b.g.edge(entry, base + q0);
        b.g.inits.push_back(base + q0);
      }
      b.g.inits.push_back(entry);
    }

    // side condition: at every end position marked as a traversed hole, the
    // observer must know that no equivalent run sits in an accepting end
    // position of the inner machine. The outer eventually-forever query
    // re-evaluates this at every loop position, so no temporal operator is
    // needed under the knowledge modality: an equivalent inner run that
    // accepts parks in its absorbing end states and is caught at every
    // subsequent position, while runs that stop matching the observation
    // leave the equivalence class by themselves.
    Formula phi;
    for (size_t h = 0; h < holes.size(); ++h) {
      Formula inside = f_or(f_neg_atom(inner[h].end_atom), dual(inner[h].phi));
      Formula guard = f_or(f_neg_atom(hole_endx[h]), f_know(hole_agent[h], inside));
      phi = phi ? f_and(phi, guard) : guard;
    }
    b.phi = phi;
    return b;
  }
};

} // namespace

Reduction build_reduction(const SfExpr& e, const std::vector<std::string>& sigma,
                          long state_budget) {
  validate_context_star_free(e);
  for (const auto& s : sigma) {
    if (s.find('\'') != std::string::npos)
      throw input_error("alphabet symbols must not contain primes: " + s);
    if (s.rfind("end", 0) == 0)
      throw input_error("alphabet symbols must not start with 'end': " + s);
  }
  for (const auto& s : sf_symbols(e))
    if (std::find(sigma.begin(), sigma.end(), s) == sigma.end())
      throw input_error("symbol outside the alphabet: " + s);

  RedBuilder rb{sigma, state_budget};
  auto built = rb.build(e);
  Reduction r;
  r.mas = finalize(built.g, built.agents, built.atoms, built.obs);
  if ((long)r.mas.n_states > state_budget)
    throw budget_error("generated system exceeds the state budget");
  {
    auto viols = validate_mas(r.mas);
    if (!viols.empty())
      throw internal_error("generated system is invalid: " + viols.front().message);
  }
  r.phi = built.phi;
  r.end_atom = built.end_atom;
  r.sigma = sigma;
  r.hole_agents = built.hole_agents;
  r.hole_endx = built.hole_endx;
  r.query = expand_macro("EDiamondBox", {f_and(f_atom(r.end_atom), r.phi)});
  return r;
}

ReductionReport verify_reduction(const SfExpr& e, const std::vector<std::string>& sigma,
                                 int maxlen, int depth, long state_budget, long node_cap) {
  Reduction red = build_reduction(e, sigma, state_budget);
  const Mas& m = red.mas;
  BoundedTree bt(m, depth, node_cap);

  // per-hole side-condition sets, exact at all depths via the decision
  // procedure plus run lifting
  std::vector<Run> all_runs;
  for (int u = 1; u <= bt.node_count(); ++u) all_runs.push_back(bt.run_of(u));
  std::vector<StateSet> know_nodes;  // per hole: where K[agent] theta holds
  {
    // decompose phi into its per-hole guards (!endx | K[agent] theta)
    std::vector<Formula> guards;
    std::vector<Formula> work{red.phi};
    if (red.phi)
      while (!work.empty()) {
        Formula g = work.back();
        work.pop_back();
        if (g->kind == FKind::And) {
          work.push_back(g->right);
          work.push_back(g->left);
        } else {
          guards.push_back(g);
        }
      }
    for (size_t h = 0; h < red.hole_endx.size(); ++h) {
      Formula g;
      for (const auto& cand : guards)
        if (cand->kind == FKind::Or && cand->left->kind == FKind::NegAtom &&
            cand->left->name == red.hole_endx[h])
          g = cand;
      if (!g) throw internal_error("side condition guard missing for a hole");
      Formula theta = g->right->left;  // K[agent] theta
      std::vector<bool> member = eval_closed_on_runs(theta, m, all_runs, state_budget);
      StateSet ns(bt.node_count());
      for (int u = 1; u <= bt.node_count(); ++u)
        if (member[u - 1]) ns.insert(u);
      NodeEnv env{{"Z", ns}};
      know_nodes.push_back(
          tree_eval_bounded(f_know(red.hole_agents[h], f_var("Z")), bt, env, 2).set);
    }
  }

  auto side_ok = [&](int node) {
    const auto& lab = m.labels[bt.state_of(node)];
    for (size_t h = 0; h < red.hole_endx.size(); ++h)
      if (lab.count(red.hole_endx[h]) && !know_nodes[h].contains(node)) return false;
    return true;
  };

  // witnesses: full-depth runs that loop in an end state with the side
  // condition holding at every loop position
  std::set<Word> witnessed;
  for (int u : bt.nodes_at_level(depth)) {
    Word w;
    bool ok = true;
    int entry = -1;
    std::vector<int> chain;
    for (int x = u; x > 0; x = bt.parent_of(x)) chain.push_back(x);
    std::reverse(chain.begin(), chain.end());
    for (size_t i = 0; i < chain.size(); ++i) {
      const auto& lab = m.labels[bt.state_of(chain[i])];
      int sig = 0;
      for (const auto& s : red.sigma)
        if (lab.count(s)) { w.push_back(s); ++sig; }
      if (sig > 1) throw internal_error("state carries two surface symbols");
      if (entry < 0 && lab.count(red.end_atom)) entry = (int)i;
    }
    if (entry < 0) continue;
    for (size_t i = entry; i < chain.size() && ok; ++i) {
      if (!m.labels[bt.state_of(chain[i])].count(red.end_atom)) ok = false;
      else if (!side_ok(chain[i])) ok = false;
    }
    if (ok) witnessed.insert(w);
  }

  ReductionReport rep;
  rep.depth = depth;
  std::vector<Word> queue{{}};
  for (int len = 0; len <= maxlen; ++len) {
    std::vector<Word> next;
    for (const auto& w : queue) {
      ++rep.words_checked;
      bool expected = sf_membership(e, w);
      bool got = witnessed.count(w) > 0;
      if (expected != got) rep.mismatches.push_back({w, expected, got});
      if (len < maxlen)
        for (const auto& s : sigma) {
          Word w2 = w;
          w2.push_back(s);
          next.push_back(std::move(w2));
        }
    }
    queue = std::move(next);
  }
  return rep;
}

} // namespace epimu
