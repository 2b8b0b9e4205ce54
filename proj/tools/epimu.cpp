#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "epimu/checker.hpp"
#include "epimu/config.hpp"
#include "epimu/distinction.hpp"
#include "epimu/errors.hpp"
#include "epimu/finitary.hpp"
#include "epimu/formula.hpp"
#include "epimu/hardness.hpp"
#include "epimu/mas.hpp"
#include "epimu/oracle.hpp"
#include "epimu/syntree.hpp"

using json = nlohmann::ordered_json;
using namespace epimu;

namespace {

constexpr const char* kVersion = "epimu 0.1.0";

Formula load_formula(const std::string& arg, bool require_closed = false) {
  ParseOptions opts;
  opts.require_closed = require_closed;
  if (std::filesystem::exists(arg)) return parse_formula_file(arg, opts);
  return parse_formula(arg, opts);
}

StateSet parse_state_list(const std::string& arg, int n) {
  StateSet s(n);
  std::string cur;
  auto flush = [&]() {
    if (cur.empty()) return;
    int q = std::stoi(cur);
    if (q < 1 || q > n) throw input_error("state out of range: " + cur);
    s.insert(q);
    cur.clear();
  };
  for (char c : arg) {
    if (c == ',') flush();
    else if (isdigit((unsigned char)c)) cur += c;
    else if (!isspace((unsigned char)c)) throw input_error("bad state list: " + arg);
  }
  flush();
  return s;
}

json run_json(const Run& r) {
  json a = json::array();
  for (int q : r) a.push_back(q);
  return a;
}

void emit(const json& j, bool as_json, const std::string& text) {
  if (as_json) std::cout << j.dump(2) << "\n";
  else std::cout << text;
}

int cmd_check(const std::string& model, const std::string& formula, const Config& cfg,
              bool witness, bool trace, int oracle_depth, bool require_closed) {
  Mas m = parse_mas_file(model);
  {
    auto v = validate_mas(m);
    if (!v.empty()) throw input_error("invalid model: " + v.front().message);
  }
  Formula f = load_formula(formula, require_closed);

  CheckOptions opts;
  opts.state_budget = cfg.state_budget;
  opts.node_budget = cfg.node_budget;
  opts.fuel = cfg.fuel;
  opts.oracle_depth = oracle_depth;
  opts.witness_sets = witness;
  opts.trace_ins = trace;
  CheckResult res = model_check(f, m, opts);

  json j;
  j["verdict"] = res.holds_all ? "holds" : "fails";
  j["holds_any"] = res.holds_any;
  j["per_init"] = json::object();
  for (auto& [q, ok] : res.per_init) j["per_init"][std::to_string(q)] = ok;
  j["root_model_size"] = res.root_model_size;
  j["root_set"] = res.root_set;
  if (trace) {
    j["ins_trace"] = json::array();
    for (const auto& e : res.ins_trace) {
      json t;
      t["node"] = e.node_addr;
      t["form"] = e.form;
      t["tower"] = e.tower;
      t["dom_states"] = e.dom_states;
      t["cod_states"] = e.cod_states;
      j["ins_trace"].push_back(t);
    }
  }
  if (witness) {
    j["witness_sets"] = json::array();
    for (const auto& w : res.witness_sets) {
      json t;
      t["node"] = w.node_addr;
      t["form"] = w.form;
      t["states"] = w.states;
      j["witness_sets"].push_back(t);
    }
  }
  if (res.oracle.ran) {
    j["oracle_check"] = {{"agreed", res.oracle.agreed},
                         {"exact_depth", res.oracle.exact_depth},
                         {"note", res.oracle.note}};
  }

  std::string text = std::string(res.holds_all ? "holds" : "fails") + " (root model: " +
                     std::to_string(res.root_model_size) + " states";
  if (!res.holds_all && res.holds_any) text += "; holds for some initial state";
  text += ")\n";
  for (auto& [q, ok] : res.per_init)
    text += "  init " + std::to_string(q) + ": " + (ok ? "holds" : "fails") + "\n";
  emit(j, cfg.json, text);
  return res.holds_all ? 0 : 1;
}

int cmd_nonmixing(const std::string& model, const std::string& formula, const Config& cfg) {
  Mas m = parse_mas_file(model);
  Formula f = load_formula(formula);
  NonMixingResult r = check_nonmixing(f, m);
  json j;
  j["verdict"] = r.ok ? "ok" : "violation";
  if (!r.ok) {
    j["agent_a"] = r.agent_a;
    j["agent_b"] = r.agent_b;
    j["node"] = r.node_addr.empty() ? "(root)" : r.node_addr;
    j["form"] = r.node_form;
    j["message"] = r.message;
  }
  emit(j, cfg.json, r.ok ? "ok\n" : ("violation: " + r.message + "\n"));
  return r.ok ? 0 : 1;
}

int cmd_distinguish(const std::string& model, const std::string& agent,
                    const std::string& out, const std::string& map_file, const Config& cfg) {
  Mas m = parse_mas_file(model);
  {
    auto v = validate_mas(m);
    if (!v.empty()) throw input_error("invalid model: " + v.front().message);
  }
  Distinction d = a_distinction(m, agent, cfg.state_budget);

  std::string map_text;
  for (int i = 1; i <= d.mas.n_states; ++i) {
    map_text += "(" + std::to_string(d.meta[i].base) + "," + d.meta[i].info.to_string() +
                ") -> " + std::to_string(d.chi.st_map[i]) + "\n";
  }
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw input_error("cannot write model file: " + out);
    os << print_mas(d.mas);
  }
  if (!map_file.empty()) {
    std::ofstream os(map_file);
    if (!os) throw input_error("cannot write map file: " + map_file);
    os << map_text;
  }

  json j;
  j["states"] = d.mas.n_states;
  j["transitions"] = (int)d.mas.trans.size();
  j["source_states"] = m.n_states;
  j["distinguished"] = true;

  std::string text = "distinguished system: " + std::to_string(d.mas.n_states) + " states, " +
                     std::to_string(d.mas.trans.size()) + " transitions\n";
  if (out.empty()) text += print_mas(d.mas) + map_text;
  emit(j, cfg.json, text);
  return 0;
}

int cmd_oracle(const std::string& model, const std::string& formula, int depth, int fuel,
               const std::string& diagram, const std::string& agent,
               const std::string& set_arg, const Config& cfg, bool require_closed) {
  Mas m = parse_mas_file(model);
  {
    auto v = validate_mas(m);
    if (!v.empty()) throw input_error("invalid model: " + v.front().message);
  }
  json j;
  j["diagram"] = diagram;
  j["depth"] = depth;
  int mism = 0;

  if (diagram == "plain") {
    if (formula.empty()) throw input_error("--diagram plain requires --formula");
    Formula f = load_formula(formula, require_closed);
    DiagramReport rep = check_plain_diagram(f, m, depth, fuel, cfg.state_budget, cfg.node_budget);
    j["exact_depth"] = rep.exact_depth;
    j["nodes_checked"] = rep.nodes_checked;
    j["mismatches"] = json::array();
    for (const auto& mm : rep.mismatches)
      j["mismatches"].push_back({{"run", run_json(mm.run)},
                                 {"finitary", mm.finitary_member},
                                 {"tree", mm.tree_member}});
    mism = (int)rep.mismatches.size();
  } else if (diagram == "epistemic") {
    if (agent.empty() || set_arg.empty())
      throw input_error("--diagram epistemic requires --agent and --set");
    StateSet s = parse_state_list(set_arg, m.n_states);
    EpistemicDiagramReport rep =
        check_epistemic_diagram(m, agent, s, depth, cfg.state_budget, cfg.node_budget);
    j["know_mismatches"] = json::array();
    j["poss_mismatches"] = json::array();
    for (const auto& mm : rep.know_mismatches)
      j["know_mismatches"].push_back({{"run", run_json(mm.run)},
                                      {"finitary", mm.finitary_member},
                                      {"tree", mm.tree_member}});
    for (const auto& mm : rep.poss_mismatches)
      j["poss_mismatches"].push_back({{"run", run_json(mm.run)},
                                      {"finitary", mm.finitary_member},
                                      {"tree", mm.tree_member}});
    mism = (int)(rep.know_mismatches.size() + rep.poss_mismatches.size());
  } else {
    throw input_error("unknown diagram kind: " + diagram);
  }

  std::string text = diagram + " diagram at depth " + std::to_string(depth) + ": " +
                     (mism == 0 ? "no mismatch\n" : std::to_string(mism) + " mismatch(es)\n");
  emit(j, cfg.json, text);
  return mism == 0 ? 0 : 1;
}

int cmd_gen_hard(const std::string& expr_file, const std::string& out_dir, const Config& cfg) {
  SfxFile sfx = parse_sfx_file(expr_file);
  Reduction red = build_reduction(sfx.expr, sfx.alphabet, cfg.state_budget);

  std::filesystem::create_directories(out_dir);
  std::string model_path = (std::filesystem::path(out_dir) / "model.mas").string();
  std::string query_path = (std::filesystem::path(out_dir) / "query.muk").string();
  {
    std::ofstream os(model_path);
    if (!os) throw input_error("cannot write " + model_path);
    os << print_mas(red.mas);
  }
  {
    std::ofstream os(query_path);
    if (!os) throw input_error("cannot write " + query_path);
    os << print_formula(red.query) << "\n";
  }

  json j;
  j["model"] = model_path;
  j["query"] = query_path;
  j["states"] = red.mas.n_states;
  j["transitions"] = (int)red.mas.trans.size();
  j["agents"] = red.mas.agents;
  j["end_atom"] = red.end_atom;

  std::string text = "wrote " + model_path + " (" + std::to_string(red.mas.n_states) +
                     " states) and " + query_path + "\n";
  emit(j, cfg.json, text);
  return 0;
}

int cmd_verify_reduction(const std::string& expr_file, int maxlen, int depth, const Config& cfg) {
  SfxFile sfx = parse_sfx_file(expr_file);
  ReductionReport rep = verify_reduction(sfx.expr, sfx.alphabet, maxlen, depth,
                                         cfg.state_budget, cfg.node_budget);
  json j;
  j["maxlen"] = maxlen;
  j["depth"] = rep.depth;
  j["words_checked"] = rep.words_checked;
  j["mismatches"] = json::array();
  for (const auto& mm : rep.mismatches) {
    std::string w;
    for (const auto& s : mm.word) w += (w.empty() ? "" : ".") + s;
    j["mismatches"].push_back({{"word", w}, {"expected", mm.expected}, {"got", mm.got}});
  }
  std::string text = std::to_string(rep.words_checked) + " words checked, " +
                     std::to_string(rep.mismatches.size()) + " mismatch(es)\n";
  emit(j, cfg.json, text);
  return rep.mismatches.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"epistemic mu-calculus model checker with synchronous perfect recall"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Config cfg;
  std::string model, formula, agent, out, map_file, diagram = "plain", set_arg, expr_file;
  int depth = 0, fuel = 0, maxlen = 4, oracle_depth = 0;
  bool witness = false, trace = false, require_closed = false;

  auto add_common = [&](CLI::App* c) {
    c->add_flag("--json", cfg.json, "machine-readable output");
    c->add_option("--budget-states", cfg.state_budget, "subset-construction state cap");
    c->add_option("--budget-nodes", cfg.node_budget, "bounded-unfolding node cap");
  };

  auto* check = app.add_subcommand("check", "decide a formula on a model");
  check->add_option("--model", model, "model file")->required();
  check->add_option("--formula", formula, "formula file or inline text")->required();
  check->add_flag("--witness-sets", witness, "report satisfying sets per closed subformula");
  check->add_flag("--trace-ins", trace, "report the determinization trace");
  check->add_option("--oracle-depth", oracle_depth, "cross-check against the bounded unfolding");
  check->add_option("--fuel", cfg.fuel, "fixpoint approximant cap for the cross-check");
  check->add_flag("--require-closed", require_closed, "reject open formulas at parse time");
  add_common(check);

  auto* nonmix = app.add_subcommand("nonmixing", "membership in the checkable fragment");
  nonmix->add_option("--model", model, "model file")->required();
  nonmix->add_option("--formula", formula, "formula file or inline text")->required();
  add_common(nonmix);

  auto* dist = app.add_subcommand("distinguish", "determinize a model for one agent");
  dist->add_option("--model", model, "model file")->required();
  dist->add_option("--agent", agent, "agent name")->required();
  dist->add_option("--out", out, "output model file");
  dist->add_option("--map", map_file, "output state-map file");
  add_common(dist);

  auto* orac = app.add_subcommand("oracle", "bounded-unfolding diagram checks");
  orac->add_option("--model", model, "model file")->required();
  orac->add_option("--formula", formula, "formula file or inline text (plain diagram)");
  orac->add_option("--depth", depth, "unfolding depth")->required();
  orac->add_option("--fuel", fuel, "fixpoint approximant cap");
  orac->add_option("--diagram", diagram, "plain | epistemic");
  orac->add_option("--agent", agent, "agent (epistemic diagram)");
  orac->add_option("--set", set_arg, "state set, e.g. 1,3 (epistemic diagram)");
  orac->add_flag("--require-closed", require_closed, "reject open formulas at parse time");
  add_common(orac);

  auto* gen = app.add_subcommand("gen-hard", "generate a hardness instance");
  gen->add_option("--expr", expr_file, "star-free expression file")->required();
  gen->add_option("--out", out, "output directory")->required();
  add_common(gen);

  auto* ver = app.add_subcommand("verify-reduction", "bounded check of the reduction property");
  ver->add_option("--expr", expr_file, "star-free expression file")->required();
  ver->add_option("--maxlen", maxlen, "maximum word length")->required();
  ver->add_option("--depth", depth, "witness path depth (default maxlen + 5)");
  add_common(ver);

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.apply_env();
    cfg.validate();
    if (*check) return cmd_check(model, formula, cfg, witness, trace, oracle_depth, require_closed);
    if (*nonmix) return cmd_nonmixing(model, formula, cfg);
    if (*dist) return cmd_distinguish(model, agent, out, map_file, cfg);
    if (*orac)
      return cmd_oracle(model, formula, depth, fuel > 0 ? fuel : cfg.fuel, diagram, agent,
                        set_arg, cfg, require_closed);
    if (*gen) return cmd_gen_hard(expr_file, out, cfg);
    if (*ver)
      return cmd_verify_reduction(expr_file, maxlen, depth > 0 ? depth : maxlen + 5, cfg);
  } catch (const budget_error& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 3;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 2;
}
