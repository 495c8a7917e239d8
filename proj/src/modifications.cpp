#include "himm/modifications.hpp"

#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace himm {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

// Moves marks and exit entries of a grafted payload into the destination
// containers, rewriting machine ids and the node ids inside trajectories.
void migrate_payload(const MarkSet& src_marks, const ExitTable& src_table,
                     const std::vector<std::pair<MachineId, MachineId>>& machine_map,
                     const std::vector<std::pair<NodeId, NodeId>>& node_map, MarkSet& marks,
                     ExitTable& table) {
  std::unordered_map<NodeId, NodeId> nmap(node_map.begin(), node_map.end());
  for (auto [old_m, new_m] : machine_map) {
    if (src_marks.count(old_m)) {
      marks.insert(new_m);
      continue;
    }
    if (!src_table.has(old_m)) {
      // Neither marked nor computed would break the recompute invariants.
      marks.insert(new_m);
      continue;
    }
    ExitEntry entry = src_table.at(old_m);
    for (auto& traj : entry.trajs) {
      if (!traj) continue;
      for (AugmentedStep& s : *traj) s.state = nmap.at(s.state);
    }
    table.at(new_m) = std::move(entry);
  }
}

// Grafting must either succeed completely or leave the target untouched, so
// alphabet and name collisions are checked up front.
void check_graftable(const Hierarchy& dst, const Hierarchy& src) {
  if (src.root() == kNoMachine) fail("cannot graft an empty hierarchy");
  if (src.alphabet() != dst.alphabet()) fail("grafted hierarchy uses a different alphabet");
  for (MachineId m : src.machine_ids())
    for (NodeId q : src.machine(m).states)
      if (dst.find_node(src.node(q).name))
        fail("grafted state name already exists: " + src.node(q).name);
}

ApplyReceipt apply_add_state(Hierarchy& h, MarkSet& marks, ExitTable& table, AddState& m) {
  if (!h.machine_alive(m.machine)) fail("add_state: no such machine");
  if (m.attached) check_graftable(h, m.attached->hierarchy);
  NodeId q = h.add_state(m.machine, m.name);
  if (m.attached) {
    std::vector<std::pair<MachineId, MachineId>> machine_map;
    std::vector<std::pair<NodeId, NodeId>> node_map;
    h.graft_from(m.attached->hierarchy, q, &machine_map, &node_map);
    migrate_payload(m.attached->marks, m.attached->table, machine_map, node_map, marks, table);
  }
  return {m.machine, false, q};
}

ApplyReceipt apply_subtract_state(Hierarchy& h, MarkSet& marks, ExitTable& table,
                                  const SubtractState& m) {
  if (!h.machine_alive(m.machine)) fail("subtract_state: no such machine");
  std::vector<MachineId> removed = h.remove_state(m.machine, m.state);
  for (MachineId dead : removed) {
    marks.erase(dead);
    table.reset(dead);
  }
  return {m.machine, false, kNoNode};
}

ApplyReceipt apply_arc_modification(Hierarchy& h, const ArcModification& m) {
  if (!h.machine_alive(m.machine)) fail("arc_modification: no such machine");
  h.replace_arcs(m.machine, m.arcs, m.start);
  return {m.machine, false, kNoNode};
}

ApplyReceipt apply_composition(Hierarchy& h, MarkSet& marks, ExitTable& table, Composition& m) {
  if (m.parts.size() > m.machine.states.size())
    fail("composition: more parts than states in the new root");
  std::size_t current_uses = 0;
  for (const CompositionPart& p : m.parts)
    if (std::holds_alternative<CurrentHierarchy>(p)) ++current_uses;
  if (current_uses > 1) fail("composition: the current hierarchy can be a part only once");

  // The current hierarchy is grafted by reference and replaced only once the
  // whole composition has been assembled, so failures leave it intact.
  Hierarchy fresh(h.alphabet());
  MachineId root = fresh.add_root_machine(m.machine.label);
  std::vector<NodeId> locals;
  for (const std::string& name : m.machine.states) locals.push_back(fresh.add_state(root, name));

  MarkSet fresh_marks;
  ExitTable fresh_table;
  for (std::size_t i = 0; i < m.parts.size(); ++i) {
    const Hierarchy* src;
    const MarkSet* src_marks;
    const ExitTable* src_table;
    if (std::holds_alternative<CurrentHierarchy>(m.parts[i])) {
      src = &h;
      src_marks = &marks;
      src_table = &table;
    } else {
      const SubHierarchy& part = std::get<SubHierarchy>(m.parts[i]);
      src = &part.hierarchy;
      src_marks = &part.marks;
      src_table = &part.table;
    }
    check_graftable(fresh, *src);
    std::vector<std::pair<MachineId, MachineId>> machine_map;
    std::vector<std::pair<NodeId, NodeId>> node_map;
    fresh.graft_from(*src, locals[i], &machine_map, &node_map);
    migrate_payload(*src_marks, *src_table, machine_map, node_map, fresh_marks, fresh_table);
  }

  auto resolve = [&](const std::string& name) {
    auto q = fresh.find_node(name);
    if (!q || fresh.node(*q).machine != root)
      fail("composition: unknown root state " + name);
    return *q;
  };
  std::vector<Hierarchy::Arc> arcs;
  for (const MachineDraft::Arc& a : m.machine.arcs)
    arcs.push_back({resolve(a.from), a.input, resolve(a.to), a.cost});
  fresh.replace_arcs(root, arcs, resolve(m.machine.start));

  h = std::move(fresh);
  marks = std::move(fresh_marks);
  table = std::move(fresh_table);
  return {root, true, kNoNode};
}

}  // namespace

SubHierarchy SubHierarchy::fresh(Hierarchy h) {
  SubHierarchy s;
  s.marks = init_marks(h);
  s.hierarchy = std::move(h);
  return s;
}

MarkSet init_marks(const Hierarchy& h) {
  MarkSet marks;
  for (MachineId m : h.machine_ids()) marks.insert(m);
  return marks;
}

ApplyReceipt apply(Hierarchy& h, MarkSet& marks, ExitTable& table, Modification m) {
  if (auto* add = std::get_if<AddState>(&m)) return apply_add_state(h, marks, table, *add);
  if (auto* sub = std::get_if<SubtractState>(&m)) return apply_subtract_state(h, marks, table, *sub);
  if (auto* arc = std::get_if<ArcModification>(&m)) return apply_arc_modification(h, *arc);
  return apply_composition(h, marks, table, std::get<Composition>(m));
}

void mark(const Hierarchy& h, MarkSet& marks, ExitTable& table, const ApplyReceipt& receipt) {
  marks.insert(receipt.target);
  table.invalidate(receipt.target);
  if (receipt.composition) return;
  for (MachineId cur = h.machine(receipt.target).parent; cur != kNoMachine;
       cur = h.machine(cur).parent) {
    marks.insert(cur);
    table.invalidate(cur);
  }
}

ApplyReceipt apply_and_mark(Hierarchy& h, MarkSet& marks, ExitTable& table, Modification m) {
  ApplyReceipt receipt = apply(h, marks, table, std::move(m));
  mark(h, marks, table, receipt);
  return receipt;
}

bool marks_form_root_subtree(const Hierarchy& h, const MarkSet& marks) {
  if (marks.empty()) return true;
  if (!marks.count(h.root())) return false;
  for (MachineId m : marks) {
    if (!h.machine_alive(m)) return false;
    if (m != h.root() && !marks.count(h.machine(m).parent)) return false;
  }
  return true;
}

}  // namespace himm
