#include "epimu/mas.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "epimu/errors.hpp"

namespace epimu {

bool Mas::has_agent(const std::string& a) const {
  return std::find(agents.begin(), agents.end(), a) != agents.end();
}

bool Mas::has_atom(const std::string& p) const {
  return std::find(atoms.begin(), atoms.end(), p) != atoms.end();
}

std::vector<int> Mas::successors(int q) const {
  std::vector<int> r;
  for (auto& [a, b] : trans)
    if (a == q) r.push_back(b);
  return r;
}

std::vector<int> Mas::predecessors(int q) const {
  std::vector<int> r;
  for (auto& [a, b] : trans)
    if (b == q) r.push_back(a);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

int Mas::outdeg(int q) const {
  int d = 0;
  for (auto& [a, b] : trans)
    if (a == q) ++d;
  return d;
}

std::set<std::string> Mas::obs_label(int q, const std::string& a) const {
  std::set<std::string> r;
  auto it = obs.find(a);
  if (it == obs.end()) throw input_error("unknown agent: " + a);
  for (const auto& p : labels[q])
    if (it->second.count(p)) r.insert(p);
  return r;
}

void Mas::normalize() {
  std::sort(trans.begin(), trans.end());
  trans.erase(std::unique(trans.begin(), trans.end()), trans.end());
  std::sort(inits.begin(), inits.end());
  inits.erase(std::unique(inits.begin(), inits.end()), inits.end());
  if ((int)labels.size() < n_states + 1) labels.resize(n_states + 1);
}

bool Mas::operator==(const Mas& o) const {
  return n_states == o.n_states && agents == o.agents && atoms == o.atoms &&
         obs == o.obs && labels == o.labels && trans == o.trans && inits == o.inits;
}

std::vector<Violation> validate_mas(const Mas& m) {
  std::vector<Violation> v;
  auto in_range = [&](int q) { return q >= 1 && q <= m.n_states; };

  if (m.n_states <= 0) v.push_back({"system has no states"});
  if (m.inits.empty()) v.push_back({"no initial state"});
  for (int q : m.inits)
    if (!in_range(q)) v.push_back({"initial state not in states: " + std::to_string(q)});
  for (auto& [a, b] : m.trans) {
    if (!in_range(a) || !in_range(b))
      v.push_back({"transition endpoint not in states: " + std::to_string(a) + "->" + std::to_string(b)});
  }
  for (const auto& ag : m.agents) {
    auto it = m.obs.find(ag);
    if (it == m.obs.end()) {
      v.push_back({"agent " + ag + " has no observation set"});
      continue;
    }
    for (const auto& p : it->second)
      if (!m.has_atom(p)) v.push_back({"observable atom of agent " + ag + " not declared: " + p});
  }
  for (const auto& [ag, _] : m.obs)
    if (!m.has_agent(ag)) v.push_back({"observation set for undeclared agent: " + ag});
  if ((int)m.labels.size() != m.n_states + 1) {
    v.push_back({"label table size mismatch"});
    return v; // later checks index labels
  }
  for (int q = 1; q <= m.n_states; ++q)
    for (const auto& p : m.labels[q])
      if (!m.has_atom(p)) v.push_back({"label atom of state " + std::to_string(q) + " not declared: " + p});

  if (m.n_states > 0) {
    // totality
    std::vector<int> deg(m.n_states + 1, 0);
    for (auto& [a, b] : m.trans)
      if (in_range(a) && in_range(b)) deg[a]++;
    for (int q = 1; q <= m.n_states; ++q)
      if (deg[q] == 0) v.push_back({"state " + std::to_string(q) + " has no successor"});

    // reachability from inits
    std::vector<char> seen(m.n_states + 1, 0);
    std::deque<int> work;
    for (int q : m.inits)
      if (in_range(q) && !seen[q]) { seen[q] = 1; work.push_back(q); }
    while (!work.empty()) {
      int q = work.front();
      work.pop_front();
      for (auto& [a, b] : m.trans)
        if (a == q && in_range(b) && !seen[b]) { seen[b] = 1; work.push_back(b); }
    }
    for (int q = 1; q <= m.n_states; ++q)
      if (!seen[q]) v.push_back({"state " + std::to_string(q) + " unreachable from initial states"});
  }
  return v;
}

bool is_run(const Mas& m, const Run& r) {
  if (r.empty()) return false;
  if (std::find(m.inits.begin(), m.inits.end(), r[0]) == m.inits.end()) return false;
  for (size_t i = 0; i + 1 < r.size(); ++i)
    if (!std::binary_search(m.trans.begin(), m.trans.end(), std::make_pair(r[i], r[i + 1])))
      return false;
  for (int q : r)
    if (q < 1 || q > m.n_states) return false;
  return true;
}

std::vector<std::set<std::string>> obs_trace(const Mas& m, const std::string& a, const Run& r) {
  std::vector<std::set<std::string>> t;
  t.reserve(r.size());
  for (int q : r) t.push_back(m.obs_label(q, a));
  return t;
}

bool obs_equiv(const Mas& m, const std::string& a, const Run& r1, const Run& r2) {
  if (!is_run(m, r1) || !is_run(m, r2)) throw input_error("obs_equiv: argument is not a run of the system");
  if (r1.size() != r2.size()) return false;
  for (size_t i = 0; i < r1.size(); ++i)
    if (m.obs_label(r1[i], a) != m.obs_label(r2[i], a)) return false;
  return true;
}

std::vector<Run> runs_up_to(const Mas& m, int depth, long node_cap) {
  if (depth < 1) throw input_error("runs_up_to: depth must be >= 1");
  std::vector<Run> out;
  std::vector<Run> frontier;
  for (int q : m.inits) frontier.push_back({q});
  std::sort(frontier.begin(), frontier.end());
  for (int d = 1; d <= depth; ++d) {
    for (auto& r : frontier) {
      out.push_back(r);
      if ((long)out.size() > node_cap)
        throw budget_error("runs_up_to: node budget exceeded (" + std::to_string(node_cap) + ")");
    }
    if (d == depth) break;
    std::vector<Run> next;
    for (const auto& r : frontier)
      for (int s : m.successors(r.back())) {
        Run r2 = r;
        r2.push_back(s);
        next.push_back(std::move(r2));
      }
    std::sort(next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

MasIndex::MasIndex(const Mas& mas) : m(&mas) {
  if (mas.atoms.size() > 64) throw budget_error("more than 64 atoms not supported");
  for (size_t i = 0; i < mas.atoms.size(); ++i) atom_id[mas.atoms[i]] = (int)i;
  label_mask.assign(mas.n_states + 1, 0);
  for (int q = 1; q <= mas.n_states; ++q)
    for (const auto& p : mas.labels[q]) label_mask[q] |= uint64_t(1) << atom_id.at(p);
  for (const auto& ag : mas.agents) {
    uint64_t msk = 0;
    for (const auto& p : mas.obs.at(ag)) msk |= uint64_t(1) << atom_id.at(p);
    obs_mask[ag] = msk;
    std::vector<int> codes(mas.n_states + 1, 0);
    std::map<uint64_t, int> intern;
    for (int q = 1; q <= mas.n_states; ++q) {
      uint64_t o = label_mask[q] & msk;
      auto [it, fresh] = intern.emplace(o, (int)intern.size());
      codes[q] = it->second;
    }
    obs_code[ag] = std::move(codes);
  }
  succ.assign(mas.n_states + 1, {});
  pred.assign(mas.n_states + 1, {});
  for (auto& [a, b] : mas.trans) {
    succ[a].push_back(b);
    pred[b].push_back(a);
  }
  for (auto& s : succ) std::sort(s.begin(), s.end());
  for (auto& p : pred) std::sort(p.begin(), p.end());
}

namespace {

std::vector<std::string> tokens_of(const std::string& s) {
  std::vector<std::string> toks;
  std::istringstream is(s);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

bool ident_ok(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(isalnum((unsigned char)c) || c == '_' || c == '\'')) return false;
  return true;
}

} // namespace

Mas parse_mas(const std::string& text) {
  Mas m;
  bool states_seen = false;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) { throw parse_error(msg, lineno, 1); };

  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    std::string line = raw;
    auto colon = line.find(':');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (colon == std::string::npos) fail("expected 'key: values' line");
    std::string key_part = line.substr(0, colon);
    std::string val_part = line.substr(colon + 1);
    auto keys = tokens_of(key_part);
    auto vals = tokens_of(val_part);
    if (keys.empty()) fail("missing key");
    const std::string& key = keys[0];

    if (key == "agents") {
      if (keys.size() != 1) fail("malformed agents line");
      for (auto& a : vals) {
        if (!ident_ok(a)) fail("bad agent name: " + a);
        m.agents.push_back(a);
      }
    } else if (key == "atoms") {
      if (keys.size() != 1) fail("malformed atoms line");
      for (auto& p : vals) {
        if (!ident_ok(p)) fail("bad atom name: " + p);
        m.atoms.push_back(p);
      }
    } else if (key == "obs") {
      if (keys.size() != 2) fail("obs line must name one agent");
      m.obs[keys[1]] = std::set<std::string>(vals.begin(), vals.end());
    } else if (key == "states") {
      if (vals.size() != 1) fail("states line takes one count");
      try {
        m.n_states = std::stoi(vals[0]);
      } catch (...) {
        fail("bad state count: " + vals[0]);
      }
      states_seen = true;
      m.labels.assign(m.n_states + 1, {});
    } else if (key == "init") {
      for (auto& v : vals) {
        try {
          m.inits.push_back(std::stoi(v));
        } catch (...) {
          fail("bad initial state: " + v);
        }
      }
    } else if (key == "label") {
      if (!states_seen) fail("label line before states line");
      if (keys.size() != 2) fail("label line must name one state");
      int q = 0;
      try {
        q = std::stoi(keys[1]);
      } catch (...) {
        fail("bad state id: " + keys[1]);
      }
      if (q < 1 || q > m.n_states) fail("label state out of range: " + keys[1]);
      m.labels[q] = std::set<std::string>(vals.begin(), vals.end());
    } else if (key == "trans") {
      // whitespace-insensitive: "1->2", "1 -> 2" and "1-> 2" all parse
      auto complete = [](const std::string& t) {
        auto arrow = t.find("->");
        if (arrow == std::string::npos || arrow == 0 || arrow + 2 >= t.size()) return false;
        for (size_t i = 0; i < t.size(); ++i) {
          if (i >= arrow && i < arrow + 2) continue;
          if (!isdigit((unsigned char)t[i])) return false;
        }
        return true;
      };
      std::string buf;
      for (auto& t : vals) {
        buf += t;
        if (!complete(buf)) continue;
        auto arrow = buf.find("->");
        m.trans.emplace_back(std::stoi(buf.substr(0, arrow)), std::stoi(buf.substr(arrow + 2)));
        buf.clear();
      }
      if (!buf.empty()) fail("bad transition token: " + buf);
    } else {
      fail("unknown key: " + key);
    }
  }
  if (!states_seen) throw input_error("model file has no states line");
  // agents without an explicit obs line observe nothing
  for (const auto& a : m.agents) m.obs.emplace(a, std::set<std::string>{});
  m.normalize();
  return m;
}

Mas parse_mas_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mas(ss.str());
}

std::string print_mas(const Mas& m) {
  std::ostringstream os;
  os << "agents:";
  for (const auto& a : m.agents) os << " " << a;
  os << "\natoms:";
  for (const auto& p : m.atoms) os << " " << p;
  os << "\n";
  for (const auto& a : m.agents) {
    os << "obs " << a << ":";
    for (const auto& p : m.obs.at(a)) os << " " << p;
    os << "\n";
  }
  os << "states: " << m.n_states << "\n";
  os << "init:";
  for (int q : m.inits) os << " " << q;
  os << "\n";
  for (int q = 1; q <= m.n_states; ++q) {
    os << "label " << q << ":";
    for (const auto& p : m.labels[q]) os << " " << p;
    os << "\n";
  }
  os << "trans:";
  for (auto& [a, b] : m.trans) os << " " << a << "->" << b;
  os << "\n";
  return os.str();
}

} // namespace epimu
