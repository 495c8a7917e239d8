#include "himm/model_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace himm {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw ModelError(what); }

void expect_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) bad(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) bad(where + ": unknown key \"" + key + "\"");
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) bad(where + ": missing key \"" + key + "\"");
  return *it;
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) bad(where + ": expected a string");
  return v.get<std::string>();
}

Cost as_cost(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where + ": cost must be a number");
  Cost c = v.get<Cost>();
  if (!(c >= 0) || !std::isfinite(c)) bad(where + ": cost must be finite and nonnegative");
  return c;
}

Input input_of(const Hierarchy& h, const std::string& name, const std::string& where) {
  auto x = h.find_input(name);
  if (!x) bad(where + ": unknown input \"" + name + "\"");
  return *x;
}

NodeId state_of(const Hierarchy& h, MachineId m, const std::string& name,
                const std::string& where) {
  auto q = h.find_node(name);
  if (!q || h.node(*q).machine != m)
    bad(where + ": \"" + name + "\" is not a state of machine " + h.machine(m).label);
  return *q;
}

MachineId machine_of(const Hierarchy& h, const std::string& label, const std::string& where) {
  auto m = h.find_machine(label);
  if (!m) bad(where + ": unknown machine \"" + label + "\"");
  return *m;
}

void load_transitions(Hierarchy& h, MachineId m, const json& transitions,
                      const std::string& where) {
  if (!transitions.is_array()) bad(where + ": transitions must be an array");
  for (const json& t : transitions) {
    expect_keys(t, {"from", "input", "to", "cost"}, where);
    NodeId from = state_of(h, m, as_string(require(t, "from", where), where), where);
    NodeId to = state_of(h, m, as_string(require(t, "to", where), where), where);
    Input x = input_of(h, as_string(require(t, "input", where), where), where);
    h.set_transition(m, from, x, to, as_cost(require(t, "cost", where), where));
  }
}

Hierarchy load_model_json(const json& doc) {
  expect_keys(doc, {"alphabet", "machines", "tree"}, "model");
  const json& alphabet = require(doc, "alphabet", "model");
  if (!alphabet.is_array() || alphabet.empty()) bad("model: alphabet must be a nonempty array");
  std::vector<std::string> inputs;
  for (const json& a : alphabet) inputs.push_back(as_string(a, "alphabet"));

  const json& machines = require(doc, "machines", "model");
  if (!machines.is_array() || machines.empty()) bad("model: machines must be a nonempty array");
  std::map<std::string, const json*> by_id;
  for (const json& m : machines) {
    expect_keys(m, {"id", "states", "start", "transitions"}, "machine");
    std::string id = as_string(require(m, "id", "machine"), "machine");
    if (!by_id.emplace(id, &m).second) bad("model: duplicate machine id \"" + id + "\"");
  }

  const json& tree = require(doc, "tree", "model");
  if (!tree.is_array()) bad("model: tree must be an array");
  std::set<std::string> attached;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> children;
  for (const json& t : tree) {
    expect_keys(t, {"machine", "parent_machine", "parent_state"}, "tree");
    std::string child = as_string(require(t, "machine", "tree"), "tree");
    std::string parent = as_string(require(t, "parent_machine", "tree"), "tree");
    std::string state = as_string(require(t, "parent_state", "tree"), "tree");
    if (!by_id.count(child)) bad("tree: unknown machine \"" + child + "\"");
    if (!by_id.count(parent)) bad("tree: unknown parent machine \"" + parent + "\"");
    if (!attached.insert(child).second) bad("tree: machine \"" + child + "\" attached twice");
    children[parent].emplace_back(state, child);
  }
  std::string root_id;
  for (const auto& [id, record] : by_id) {
    if (attached.count(id)) continue;
    if (!root_id.empty()) bad("model: multiple roots (\"" + root_id + "\", \"" + id + "\")");
    root_id = id;
  }
  if (root_id.empty()) bad("model: no root machine (tree attaches every machine)");

  Hierarchy h(inputs);
  // Instantiate depth-first from the root; transitions once states exist.
  struct Pending {
    std::string id;
    NodeId under;  // kNoNode for the root
  };
  std::vector<Pending> stack{{root_id, kNoNode}};
  std::size_t instantiated = 0;
  while (!stack.empty()) {
    auto [id, under] = stack.back();
    stack.pop_back();
    const json& rec = *by_id.at(id);
    const std::string where = "machine \"" + id + "\"";
    MachineId m = under == kNoNode ? h.add_root_machine(id) : h.add_child_machine(under, id);
    ++instantiated;
    const json& states = require(rec, "states", where);
    if (!states.is_array() || states.empty()) bad(where + ": states must be a nonempty array");
    for (const json& s : states) h.add_state(m, as_string(s, where));
    h.set_start(m, state_of(h, m, as_string(require(rec, "start", where), where), where));
    load_transitions(h, m, require(rec, "transitions", where), where);
    auto it = children.find(id);
    if (it == children.end()) continue;
    for (auto child = it->second.rbegin(); child != it->second.rend(); ++child)
      stack.push_back({child->second, state_of(h, m, child->first, "tree")});
  }
  if (instantiated != by_id.size()) bad("model: tree does not connect every machine to the root");
  return h;
}

json save_model_json(const Hierarchy& h) {
  json machines = json::array();
  json tree = json::array();
  std::vector<MachineId> order;
  std::vector<MachineId> stack{h.root()};
  while (!stack.empty()) {
    MachineId m = stack.back();
    stack.pop_back();
    order.push_back(m);
    const MealyMachine& mm = h.machine(m);
    for (std::size_t i = mm.states.size(); i-- > 0;) {
      const NodeInfo& info = h.node(mm.states[i]);
      if (!info.flat()) stack.push_back(info.child);
    }
  }
  std::set<std::string> labels;
  for (MachineId m : order) {
    const MealyMachine& mm = h.machine(m);
    if (!labels.insert(mm.label).second)
      bad("save: duplicate machine label \"" + mm.label + "\"");
    json rec;
    rec["id"] = mm.label;
    json states = json::array();
    for (NodeId q : mm.states) states.push_back(h.node(q).name);
    rec["states"] = std::move(states);
    rec["start"] = h.node(mm.start_state()).name;
    json transitions = json::array();
    for (const Hierarchy::Arc& a : machine_arcs(h, m)) {
      json t;
      t["from"] = h.node(a.from).name;
      t["input"] = h.alphabet()[static_cast<std::size_t>(a.input)];
      t["to"] = h.node(a.to).name;
      t["cost"] = a.cost;
      transitions.push_back(std::move(t));
    }
    rec["transitions"] = std::move(transitions);
    machines.push_back(std::move(rec));
    if (m != h.root()) {
      json arc;
      arc["machine"] = mm.label;
      arc["parent_machine"] = h.machine(mm.parent).label;
      arc["parent_state"] = h.node(mm.parent_state).name;
      tree.push_back(std::move(arc));
    }
  }
  json doc;
  doc["alphabet"] = h.alphabet();
  doc["machines"] = std::move(machines);
  doc["tree"] = std::move(tree);
  return doc;
}

json parse_json(const std::string& text, const std::string& what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ModelParseError(what + ": not valid JSON");
  return doc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<Hierarchy::Arc> parse_arcs(const Hierarchy& h, MachineId m, const json& transitions,
                                       const std::string& where) {
  if (!transitions.is_array()) bad(where + ": transitions must be an array");
  std::vector<Hierarchy::Arc> arcs;
  for (const json& t : transitions) {
    expect_keys(t, {"from", "input", "to", "cost"}, where);
    arcs.push_back({state_of(h, m, as_string(require(t, "from", where), where), where),
                    input_of(h, as_string(require(t, "input", where), where), where),
                    state_of(h, m, as_string(require(t, "to", where), where), where),
                    as_cost(require(t, "cost", where), where)});
  }
  return arcs;
}

MachineDraft parse_draft(const Hierarchy& h, const json& rec, const std::string& where) {
  expect_keys(rec, {"id", "states", "start", "transitions"}, where);
  MachineDraft draft;
  draft.label = as_string(require(rec, "id", where), where);
  const json& states = require(rec, "states", where);
  if (!states.is_array() || states.empty()) bad(where + ": states must be a nonempty array");
  for (const json& s : states) draft.states.push_back(as_string(s, where));
  draft.start = as_string(require(rec, "start", where), where);
  const json& transitions = require(rec, "transitions", where);
  if (!transitions.is_array()) bad(where + ": transitions must be an array");
  for (const json& t : transitions) {
    expect_keys(t, {"from", "input", "to", "cost"}, where);
    draft.arcs.push_back({as_string(require(t, "from", where), where),
                          input_of(h, as_string(require(t, "input", where), where), where),
                          as_string(require(t, "to", where), where),
                          as_cost(require(t, "cost", where), where)});
  }
  return draft;
}

Modification parse_modification(const Hierarchy& h, const json& rec) {
  const std::string op = as_string(require(rec, "op", "script"), "script");
  if (op == "add_state") {
    expect_keys(rec, {"op", "machine", "name", "attached"}, "add_state");
    AddState m;
    m.machine = machine_of(h, as_string(require(rec, "machine", "add_state"), "add_state"),
                           "add_state");
    m.name = as_string(require(rec, "name", "add_state"), "add_state");
    if (rec.contains("attached"))
      m.attached = SubHierarchy::fresh(load_model_json(rec.at("attached")));
    return m;
  }
  if (op == "subtract_state") {
    expect_keys(rec, {"op", "machine", "state"}, "subtract_state");
    MachineId m = machine_of(h, as_string(require(rec, "machine", "subtract_state"),
                                          "subtract_state"),
                             "subtract_state");
    NodeId q = state_of(h, m, as_string(require(rec, "state", "subtract_state"),
                                        "subtract_state"),
                        "subtract_state");
    return SubtractState{m, q};
  }
  if (op == "arc_modification") {
    expect_keys(rec, {"op", "machine", "start", "transitions"}, "arc_modification");
    ArcModification m;
    m.machine = machine_of(h, as_string(require(rec, "machine", "arc_modification"),
                                        "arc_modification"),
                           "arc_modification");
    m.start = state_of(h, m.machine,
                       as_string(require(rec, "start", "arc_modification"), "arc_modification"),
                       "arc_modification");
    m.arcs = parse_arcs(h, m.machine, require(rec, "transitions", "arc_modification"),
                        "arc_modification");
    return m;
  }
  if (op == "composition") {
    expect_keys(rec, {"op", "machine", "parts"}, "composition");
    Composition m;
    m.machine = parse_draft(h, require(rec, "machine", "composition"), "composition");
    const json& parts = require(rec, "parts", "composition");
    if (!parts.is_array()) bad("composition: parts must be an array");
    for (const json& p : parts) {
      if (p.is_string() && p.get<std::string>() == "current")
        m.parts.emplace_back(CurrentHierarchy{});
      else
        m.parts.emplace_back(SubHierarchy::fresh(load_model_json(p)));
    }
    return m;
  }
  bad("script: unknown op \"" + op + "\"");
}

}  // namespace

Hierarchy load_model(const std::string& text) {
  try {
    return load_model_json(parse_json(text, "model"));
  } catch (const std::invalid_argument& e) {  // builder-enforced invariants
    throw ModelError(std::string("model: ") + e.what());
  }
}

Hierarchy load_model_file(const std::string& path) { return load_model(read_file(path)); }

std::string save_model(const Hierarchy& h) { return save_model_json(h).dump(2) + "\n"; }

void save_model_file(const Hierarchy& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) bad("cannot write " + path);
  out << save_model(h);
}

std::size_t apply_script(Hierarchy& h, MarkSet& marks, ExitTable& table, const std::string& text) {
  json doc = parse_json(text, "script");
  if (!doc.is_array()) bad("script: expected an array of records");
  std::size_t applied = 0;
  for (const json& rec : doc) {
    try {
      apply_and_mark(h, marks, table, parse_modification(h, rec));
    } catch (const std::invalid_argument& e) {
      throw ModelError(std::string("script: ") + e.what());
    }
    ++applied;
  }
  return applied;
}

std::size_t apply_script_file(Hierarchy& h, MarkSet& marks, ExitTable& table,
                              const std::string& path) {
  return apply_script(h, marks, table, read_file(path));
}

}  // namespace himm
