#include "himm/core.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <stdexcept>

namespace himm {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

}  // namespace

Hierarchy::Hierarchy(std::vector<std::string> alphabet) : alphabet_(std::move(alphabet)) {
  for (std::size_t i = 0; i < alphabet_.size(); ++i) {
    auto [it, inserted] = input_index_.emplace(alphabet_[i], static_cast<Input>(i));
    if (!inserted) fail("duplicate input name: " + alphabet_[i]);
  }
}

MachineId Hierarchy::add_root_machine(std::string label) {
  if (root_ != kNoMachine) fail("hierarchy already has a root machine");
  MachineId id = static_cast<MachineId>(machines_.size());
  MealyMachine m;
  m.id = id;
  m.label = std::move(label);
  m.n_inputs = n_inputs();
  machines_.push_back(std::move(m));
  machine_alive_.push_back(true);
  root_ = id;
  return id;
}

MachineId Hierarchy::add_child_machine(NodeId under, std::string label) {
  NodeInfo& n = node_mut(under);
  if (!n.flat()) fail("node already refines a machine: " + n.name);
  MachineId id = static_cast<MachineId>(machines_.size());
  MealyMachine m;
  m.id = id;
  m.label = std::move(label);
  m.parent = n.machine;
  m.parent_state = under;
  m.n_inputs = n_inputs();
  machines_.push_back(std::move(m));
  machine_alive_.push_back(true);
  n.child = id;
  return id;
}

NodeId Hierarchy::new_node(MachineId owner, std::string name) {
  if (node_names_.count(name)) fail("duplicate state name: " + name);
  NodeId id = static_cast<NodeId>(nodes_.size());
  NodeInfo info;
  info.alive = true;
  info.machine = owner;
  info.name = name;
  nodes_.push_back(std::move(info));
  node_names_.emplace(std::move(name), id);
  return id;
}

NodeId Hierarchy::add_state(MachineId m, std::string name) {
  MealyMachine& mm = machine_mut(m);
  NodeId id = new_node(m, std::move(name));
  nodes_[static_cast<std::size_t>(id)].local = mm.n_states();
  mm.states.push_back(id);
  mm.next.insert(mm.next.end(), static_cast<std::size_t>(mm.n_inputs), -1);
  mm.cost.insert(mm.cost.end(), static_cast<std::size_t>(mm.n_inputs),
                 std::numeric_limits<Cost>::quiet_NaN());
  return id;
}

void Hierarchy::set_start(MachineId m, NodeId s) {
  MealyMachine& mm = machine_mut(m);
  const NodeInfo& n = node(s);
  if (n.machine != m) fail("start state does not belong to machine " + mm.label);
  mm.start = n.local;
}

void Hierarchy::set_transition(MachineId m, NodeId from, Input x, NodeId to, Cost c) {
  MealyMachine& mm = machine_mut(m);
  const NodeInfo& nf = node(from);
  const NodeInfo& nt = node(to);
  if (nf.machine != m || nt.machine != m)
    fail("transition endpoints must belong to machine " + mm.label);
  if (x < 0 || x >= mm.n_inputs) fail("input id out of range");
  if (!(c >= 0) || std::isinf(c)) fail("transition cost must be finite and nonnegative");
  std::size_t k = static_cast<std::size_t>(nf.local) * mm.n_inputs + x;
  mm.next[k] = nt.local;
  mm.cost[k] = c;
}

void Hierarchy::clear_transition(MachineId m, NodeId from, Input x) {
  MealyMachine& mm = machine_mut(m);
  const NodeInfo& nf = node(from);
  if (nf.machine != m) fail("state does not belong to machine " + mm.label);
  std::size_t k = static_cast<std::size_t>(nf.local) * mm.n_inputs + x;
  mm.next[k] = -1;
  mm.cost[k] = std::numeric_limits<Cost>::quiet_NaN();
}

void Hierarchy::replace_arcs(MachineId m, const std::vector<Arc>& arcs, NodeId new_start) {
  MealyMachine& mm = machine_mut(m);
  // Validate everything before touching the machine so a bad arc list cannot
  // leave it half replaced.
  if (node(new_start).machine != m) fail("start state does not belong to machine " + mm.label);
  for (const Arc& a : arcs) {
    if (node(a.from).machine != m || node(a.to).machine != m)
      fail("transition endpoints must belong to machine " + mm.label);
    if (a.input < 0 || a.input >= mm.n_inputs) fail("input id out of range");
    if (!(a.cost >= 0) || std::isinf(a.cost))
      fail("transition cost must be finite and nonnegative");
  }
  std::fill(mm.next.begin(), mm.next.end(), -1);
  std::fill(mm.cost.begin(), mm.cost.end(), std::numeric_limits<Cost>::quiet_NaN());
  set_start(m, new_start);
  for (const Arc& a : arcs) set_transition(m, a.from, a.input, a.to, a.cost);
}

MachineId Hierarchy::graft_from(const Hierarchy& src, NodeId under,
                                std::vector<std::pair<MachineId, MachineId>>* machine_map,
                                std::vector<std::pair<NodeId, NodeId>>* node_map) {
  if (src.root_ == kNoMachine) fail("cannot graft an empty hierarchy");
  if (src.alphabet_ != alphabet_) fail("grafted hierarchy uses a different alphabet");

  // Copy machines top-down so parents exist before children.
  std::vector<std::pair<MachineId, NodeId>> stack;  // (src machine, dst parent node)
  stack.emplace_back(src.root_, under);
  MachineId new_root = kNoMachine;
  while (!stack.empty()) {
    auto [sm, dst_under] = stack.back();
    stack.pop_back();
    const MealyMachine& smm = src.machine(sm);
    MachineId dm = add_child_machine(dst_under, smm.label);
    if (machine_map) machine_map->emplace_back(sm, dm);
    if (new_root == kNoMachine) new_root = dm;
    std::vector<NodeId> locals(smm.states.size());
    for (std::size_t i = 0; i < smm.states.size(); ++i) {
      NodeId nq = add_state(dm, src.node(smm.states[i]).name);
      locals[i] = nq;
      if (node_map) node_map->emplace_back(smm.states[i], nq);
    }
    MealyMachine& dmm = machine_mut(dm);
    dmm.start = smm.start;
    dmm.next = smm.next;
    dmm.cost = smm.cost;
    // Children in reverse so the stack pops them in state order.
    for (std::size_t i = smm.states.size(); i-- > 0;) {
      const NodeInfo& sn = src.node(smm.states[i]);
      if (!sn.flat()) stack.emplace_back(sn.child, locals[i]);
    }
  }
  return new_root;
}

std::vector<MachineId> Hierarchy::remove_state(MachineId m, NodeId q) {
  MealyMachine& mm = machine_mut(m);
  const NodeInfo qi = node(q);
  if (qi.machine != m) fail("state does not belong to machine " + mm.label);
  if (qi.local == mm.start) fail("removing the start state is forbidden");

  // Collect the subtree hanging off q.
  std::vector<MachineId> removed_machines;
  std::vector<NodeId> removed_nodes{q};
  std::vector<MachineId> walk;
  if (!qi.flat()) walk.push_back(qi.child);
  while (!walk.empty()) {
    MachineId cm = walk.back();
    walk.pop_back();
    removed_machines.push_back(cm);
    for (NodeId s : machine(cm).states) {
      removed_nodes.push_back(s);
      const NodeInfo& si = node(s);
      if (!si.flat()) walk.push_back(si.child);
    }
  }

  // Drop q's row and every transition of m targeting q; repack local indices.
  const std::int32_t ni = mm.n_inputs;
  const std::int32_t dropped = qi.local;
  std::vector<std::int32_t> new_next;
  std::vector<Cost> new_cost;
  new_next.reserve(mm.next.size());
  new_cost.reserve(mm.cost.size());
  for (std::int32_t s = 0; s < mm.n_states(); ++s) {
    if (s == dropped) continue;
    for (Input x = 0; x < ni; ++x) {
      std::int32_t t = mm.target(s, x);
      if (t == dropped) {
        new_next.push_back(-1);
        new_cost.push_back(std::numeric_limits<Cost>::quiet_NaN());
      } else {
        new_next.push_back(t > dropped ? t - 1 : t);
        new_cost.push_back(mm.weight(s, x));
      }
    }
  }
  mm.states.erase(mm.states.begin() + dropped);
  mm.next = std::move(new_next);
  mm.cost = std::move(new_cost);
  if (mm.start > dropped) --mm.start;
  for (std::int32_t s = dropped; s < mm.n_states(); ++s)
    nodes_[static_cast<std::size_t>(mm.states[s])].local = s;

  for (MachineId cm : removed_machines) machine_alive_[static_cast<std::size_t>(cm)] = false;
  for (NodeId n : removed_nodes) {
    NodeInfo& info = nodes_[static_cast<std::size_t>(n)];
    node_names_.erase(info.name);
    info.alive = false;
  }
  return removed_machines;
}

std::optional<Input> Hierarchy::find_input(const std::string& name) const {
  auto it = input_index_.find(name);
  if (it == input_index_.end()) return std::nullopt;
  return it->second;
}

bool Hierarchy::machine_alive(MachineId m) const {
  return m >= 0 && static_cast<std::size_t>(m) < machines_.size() &&
         machine_alive_[static_cast<std::size_t>(m)];
}

bool Hierarchy::node_alive(NodeId q) const {
  return q >= 0 && static_cast<std::size_t>(q) < nodes_.size() &&
         nodes_[static_cast<std::size_t>(q)].alive;
}

const MealyMachine& Hierarchy::machine(MachineId m) const {
  if (!machine_alive(m)) fail("no such machine: " + std::to_string(m));
  return machines_[static_cast<std::size_t>(m)];
}

MealyMachine& Hierarchy::machine_mut(MachineId m) {
  if (!machine_alive(m)) fail("no such machine: " + std::to_string(m));
  return machines_[static_cast<std::size_t>(m)];
}

const NodeInfo& Hierarchy::node(NodeId q) const {
  if (!node_alive(q)) fail("no such node: " + std::to_string(q));
  return nodes_[static_cast<std::size_t>(q)];
}

NodeInfo& Hierarchy::node_mut(NodeId q) {
  if (!node_alive(q)) fail("no such node: " + std::to_string(q));
  return nodes_[static_cast<std::size_t>(q)];
}

std::vector<MachineId> Hierarchy::machine_ids() const {
  std::vector<MachineId> out;
  for (std::size_t i = 0; i < machines_.size(); ++i)
    if (machine_alive_[i]) out.push_back(static_cast<MachineId>(i));
  return out;
}

std::size_t Hierarchy::machine_count() const {
  std::size_t n = 0;
  for (bool a : machine_alive_) n += a ? 1 : 0;
  return n;
}

std::vector<NodeId> Hierarchy::flat_states() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].alive && nodes_[i].flat()) out.push_back(static_cast<NodeId>(i));
  return out;
}

std::size_t Hierarchy::flat_state_count() const {
  std::size_t n = 0;
  for (const NodeInfo& info : nodes_)
    if (info.alive && info.flat()) ++n;
  return n;
}

std::optional<NodeId> Hierarchy::find_node(const std::string& name) const {
  auto it = node_names_.find(name);
  if (it == node_names_.end()) return std::nullopt;
  return it->second;
}

std::optional<MachineId> Hierarchy::find_machine(const std::string& label) const {
  for (std::size_t i = 0; i < machines_.size(); ++i)
    if (machine_alive_[i] && machines_[i].label == label) return static_cast<MachineId>(i);
  return std::nullopt;
}

// -- execution semantics ------------------------------------------------------

NodeId resolve_start(const Hierarchy& h, MachineId m) {
  const MealyMachine* mm = &h.machine(m);
  for (;;) {
    NodeId s = mm->start_state();
    const NodeInfo& info = h.node(s);
    if (info.flat()) return s;
    mm = &h.machine(info.child);
  }
}

std::optional<StepResult> step(const Hierarchy& h, NodeId q, Input x) {
  NodeId cur = q;
  for (;;) {
    const NodeInfo& info = h.node(cur);
    const MealyMachine& mm = h.machine(info.machine);
    std::int32_t t = mm.target(info.local, x);
    if (t >= 0) {
      Cost c = mm.weight(info.local, x);
      NodeId land = mm.states[static_cast<std::size_t>(t)];
      while (!h.node(land).flat()) land = resolve_start(h, h.node(land).child);
      return StepResult{land, c};
    }
    if (mm.parent == kNoMachine) return std::nullopt;
    cur = mm.parent_state;
  }
}

RunResult run_plan(const Hierarchy& h, NodeId q0, const std::vector<Input>& plan) {
  RunResult r;
  r.final_state = q0;
  for (Input x : plan) {
    auto s = step(h, r.final_state, x);
    if (!s) {
      r.cost = kInfiniteCost;
      return r;
    }
    r.trajectory.push_back({r.final_state, x});
    r.final_state = s->to;
    r.cost += s->cost;
  }
  return r;
}

// -- structural queries -------------------------------------------------------

int machine_depth(const Hierarchy& h, MachineId m) {
  int d = 1;
  for (MachineId cur = m; h.machine(cur).parent != kNoMachine; cur = h.machine(cur).parent) ++d;
  return d;
}

int depth(const Hierarchy& h) {
  int d = 0;
  for (MachineId m : h.machine_ids()) d = std::max(d, machine_depth(h, m));
  return d;
}

bool contains(const Hierarchy& h, MachineId m, NodeId q) {
  for (MachineId cur = h.node(q).machine;; cur = h.machine(cur).parent) {
    if (cur == m) return true;
    if (h.machine(cur).parent == kNoMachine) return false;
  }
}

std::vector<Hierarchy::Arc> machine_arcs(const Hierarchy& h, MachineId m) {
  const MealyMachine& mm = h.machine(m);
  std::vector<Hierarchy::Arc> arcs;
  for (std::int32_t s = 0; s < mm.n_states(); ++s)
    for (Input x = 0; x < mm.n_inputs; ++x)
      if (mm.defined(s, x))
        arcs.push_back({mm.states[static_cast<std::size_t>(s)], x,
                        mm.states[static_cast<std::size_t>(mm.target(s, x))], mm.weight(s, x)});
  return arcs;
}

Hierarchy clone_subtree(const Hierarchy& h, NodeId q) {
  const NodeInfo& info = h.node(q);
  if (info.flat()) fail("node has no subtree to clone: " + info.name);
  Hierarchy out(h.alphabet());
  // Copy the machine refining q as the new root, then graft the subtrees of
  // its non-flat states.
  const MealyMachine& src_root = h.machine(info.child);
  MachineId r = out.add_root_machine(src_root.label);
  std::vector<NodeId> locals;
  for (NodeId s : src_root.states) locals.push_back(out.add_state(r, h.node(s).name));
  MealyMachine& rm = out.machine_mut(r);
  rm.start = src_root.start;
  rm.next = src_root.next;
  rm.cost = src_root.cost;
  for (std::size_t i = 0; i < src_root.states.size(); ++i) {
    const NodeInfo& sn = h.node(src_root.states[i]);
    if (!sn.flat()) out.graft_from(clone_subtree(h, src_root.states[i]), locals[i]);
  }
  return out;
}

// -- validation ---------------------------------------------------------------

namespace {

void check_tree(const Hierarchy& h, std::vector<Violation>& out) {
  if (h.root() == kNoMachine || !h.machine_alive(h.root())) {
    out.push_back({"no-root", "hierarchy has no live root machine"});
    return;
  }
  for (MachineId m : h.machine_ids()) {
    const MealyMachine& mm = h.machine(m);
    if (m == h.root()) {
      if (mm.parent != kNoMachine)
        out.push_back({"tree-link", "root machine " + mm.label + " has a parent"});
      continue;
    }
    if (!h.machine_alive(mm.parent) || !h.node_alive(mm.parent_state) ||
        h.node(mm.parent_state).child != m || h.node(mm.parent_state).machine != mm.parent) {
      out.push_back({"tree-link", "machine " + mm.label + " has a broken parent arc"});
      continue;
    }
    // Cycle / unreachable-root guard: walk up with a step budget.
    std::size_t budget = h.machine_count() + 1;
    MachineId cur = m;
    while (cur != h.root() && budget-- > 0) {
      MachineId p = h.machine(cur).parent;
      if (p == kNoMachine || !h.machine_alive(p)) break;
      cur = p;
    }
    if (cur != h.root())
      out.push_back({"tree-cycle", "machine " + mm.label + " does not reach the root"});
  }
}

void check_states(const Hierarchy& h, std::vector<Violation>& out) {
  std::unordered_map<NodeId, int> seen;
  for (MachineId m : h.machine_ids()) {
    const MealyMachine& mm = h.machine(m);
    if (mm.states.empty()) {
      out.push_back({"machine-empty", "machine " + mm.label + " has no states"});
      continue;
    }
    if (mm.start < 0 || mm.start >= mm.n_states())
      out.push_back({"start-missing", "machine " + mm.label + " start index out of range"});
    for (std::int32_t i = 0; i < mm.n_states(); ++i) {
      NodeId q = mm.states[static_cast<std::size_t>(i)];
      ++seen[q];
      if (!h.node_alive(q)) {
        out.push_back({"state-ownership", mm.label + " lists a dead node"});
        continue;
      }
      const NodeInfo& info = h.node(q);
      if ((info.machine != m || info.local != i) && seen[q] == 1)
        out.push_back({"state-ownership",
                       "node " + info.name + " registry entry disagrees with " + mm.label});
      if (!info.flat()) {
        if (!h.machine_alive(info.child) || h.machine(info.child).parent_state != q)
          out.push_back({"child-link", "node " + info.name + " has a broken child arc"});
      }
    }
  }
  for (const auto& [q, count] : seen)
    if (count > 1)
      out.push_back({"node-shared", "node " + (h.node_alive(q) ? h.node(q).name : std::to_string(q)) +
                                        " appears in " + std::to_string(count) + " state lists"});
}

void check_transitions(const Hierarchy& h, std::vector<Violation>& out) {
  for (MachineId m : h.machine_ids()) {
    const MealyMachine& mm = h.machine(m);
    if (mm.next.size() != mm.states.size() * static_cast<std::size_t>(mm.n_inputs) ||
        mm.cost.size() != mm.next.size()) {
      out.push_back({"table-shape", "machine " + mm.label + " tables have the wrong shape"});
      continue;
    }
    for (std::int32_t s = 0; s < mm.n_states(); ++s) {
      for (Input x = 0; x < mm.n_inputs; ++x) {
        std::int32_t t = mm.target(s, x);
        Cost c = mm.weight(s, x);
        if (t >= mm.n_states())
          out.push_back({"delta-range", "machine " + mm.label + " transition target out of range"});
        bool has_cost = !std::isnan(c);
        if ((t >= 0) != has_cost) {
          std::ostringstream msg;
          msg << "machine " << mm.label << " gamma/delta domain mismatch at state "
              << h.node(mm.states[static_cast<std::size_t>(s)]).name << " input "
              << h.alphabet()[static_cast<std::size_t>(x)];
          out.push_back({"gamma-delta-domain", msg.str()});
        }
        if (has_cost && (!(c >= 0) || std::isinf(c)))
          out.push_back({"negative-cost", "machine " + mm.label + " has a bad cost value"});
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate(const Hierarchy& h) {
  std::vector<Violation> out;
  check_tree(h, out);
  check_states(h, out);
  check_transitions(h, out);
  return out;
}

}  // namespace himm
