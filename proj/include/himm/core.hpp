// Hierarchical Mealy machines: data model and exact execution semantics
// (start resolution, hierarchical transition/output, trajectories, cost).
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace himm {

using Input = std::int32_t;      // dense index into the shared alphabet
using NodeId = std::int32_t;     // global node id, unique across the hierarchy
using MachineId = std::int32_t;  // global machine id
using Cost = double;

inline constexpr NodeId kNoNode = -1;
inline constexpr MachineId kNoMachine = -1;
inline constexpr Cost kInfiniteCost = std::numeric_limits<Cost>::infinity();

inline bool is_infinite(Cost c) { return std::isinf(c) && c > 0; }

// One machine of a hierarchy. Transition and cost tables are dense over
// (local state index, input); next < 0 marks an undefined transition and
// cost is NaN exactly there.
struct MealyMachine {
  MachineId id = kNoMachine;
  std::string label;
  MachineId parent = kNoMachine;  // kNoMachine for the root machine
  NodeId parent_state = kNoNode;  // the parent's state this machine refines
  std::vector<NodeId> states;     // local index -> node id
  std::int32_t start = 0;         // local index of the start state
  std::int32_t n_inputs = 0;
  std::vector<std::int32_t> next;
  std::vector<Cost> cost;

  std::int32_t n_states() const { return static_cast<std::int32_t>(states.size()); }
  NodeId start_state() const { return states[static_cast<std::size_t>(start)]; }

  std::int32_t target(std::int32_t local, Input x) const {
    return next[static_cast<std::size_t>(local) * n_inputs + x];
  }
  Cost weight(std::int32_t local, Input x) const {
    return cost[static_cast<std::size_t>(local) * n_inputs + x];
  }
  bool defined(std::int32_t local, Input x) const { return target(local, x) >= 0; }
};

struct NodeInfo {
  bool alive = false;
  MachineId machine = kNoMachine;  // owning machine
  std::int32_t local = -1;         // index in the owner's state list
  MachineId child = kNoMachine;    // refining machine; kNoMachine => flat
  std::string name;

  bool flat() const { return child == kNoMachine; }
};

// Tree of Mealy machines over one shared alphabet. Node and machine ids are
// allocated globally and never reused, so disjointness of state sets holds by
// construction. Immutable during queries; mutation requires exclusive access.
class Hierarchy {
 public:
  Hierarchy() = default;
  explicit Hierarchy(std::vector<std::string> alphabet);

  // -- construction ---------------------------------------------------------
  MachineId add_root_machine(std::string label);
  MachineId add_child_machine(NodeId under, std::string label);
  NodeId add_state(MachineId m, std::string name);
  void set_start(MachineId m, NodeId s);
  void set_transition(MachineId m, NodeId from, Input x, NodeId to, Cost c);
  void clear_transition(MachineId m, NodeId from, Input x);
  // Replaces the whole transition structure and start state of m.
  struct Arc {
    NodeId from = kNoNode;
    Input input = 0;
    NodeId to = kNoNode;
    Cost cost = 0;
  };
  void replace_arcs(MachineId m, const std::vector<Arc>& arcs, NodeId new_start);

  // Copies every machine of `src` (same alphabet required) beneath the flat
  // state `under`. Optionally reports the id remappings.
  MachineId graft_from(const Hierarchy& src, NodeId under,
                       std::vector<std::pair<MachineId, MachineId>>* machine_map = nullptr,
                       std::vector<std::pair<NodeId, NodeId>>* node_map = nullptr);

  // Removes state q of machine m together with the entire subtree hanging off
  // it and every transition of m mentioning q. Returns the removed machines.
  std::vector<MachineId> remove_state(MachineId m, NodeId q);

  // -- views ----------------------------------------------------------------
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  std::int32_t n_inputs() const { return static_cast<std::int32_t>(alphabet_.size()); }
  std::optional<Input> find_input(const std::string& name) const;

  MachineId root() const { return root_; }
  bool machine_alive(MachineId m) const;
  bool node_alive(NodeId q) const;
  const MealyMachine& machine(MachineId m) const;
  MealyMachine& machine_mut(MachineId m);
  const NodeInfo& node(NodeId q) const;
  NodeInfo& node_mut(NodeId q);

  std::vector<MachineId> machine_ids() const;  // alive, ascending
  std::size_t machine_count() const;
  std::vector<NodeId> flat_states() const;  // alive flat nodes, ascending
  std::size_t flat_state_count() const;
  std::optional<NodeId> find_node(const std::string& name) const;
  std::optional<MachineId> find_machine(const std::string& label) const;

  std::size_t node_slot_count() const { return nodes_.size(); }
  std::size_t machine_slot_count() const { return machines_.size(); }

 private:
  NodeId new_node(MachineId owner, std::string name);

  std::vector<std::string> alphabet_;
  std::unordered_map<std::string, Input> input_index_;
  std::vector<MealyMachine> machines_;
  std::vector<bool> machine_alive_;
  std::vector<NodeInfo> nodes_;
  std::unordered_map<std::string, NodeId> node_names_;
  MachineId root_ = kNoMachine;
};

// -- execution semantics ------------------------------------------------------

// Follows local start states downward from machine m until a flat node.
NodeId resolve_start(const Hierarchy& h, MachineId m);

struct StepResult {
  NodeId to = kNoNode;  // flat
  Cost cost = 0;
};

// Hierarchical transition: bubbles undefined inputs to ancestors, descends
// via start states on entry. Absent result means no ancestor supports x
// (a stop, not an error). q may be any node, flat or not.
std::optional<StepResult> step(const Hierarchy& h, NodeId q, Input x);

struct TrajectoryStep {
  NodeId state = kNoNode;  // flat
  Input input = 0;
};
using Trajectory = std::vector<TrajectoryStep>;

struct RunResult {
  Trajectory trajectory;  // executed steps only
  NodeId final_state = kNoNode;
  Cost cost = 0;  // infinite if some step stopped
};

RunResult run_plan(const Hierarchy& h, NodeId q0, const std::vector<Input>& plan);

// -- structural queries -------------------------------------------------------

int machine_depth(const Hierarchy& h, MachineId m);  // root has depth 1
int depth(const Hierarchy& h);
// True iff q is a state of m or of a machine below m.
bool contains(const Hierarchy& h, MachineId m, NodeId q);
std::vector<Hierarchy::Arc> machine_arcs(const Hierarchy& h, MachineId m);
// Standalone copy of the hierarchy rooted at the machine refining node q.
Hierarchy clone_subtree(const Hierarchy& h, NodeId q);

// -- validation ---------------------------------------------------------------

struct Violation {
  std::string code;
  std::string message;
};

std::vector<Violation> validate(const Hierarchy& h);

}  // namespace himm
