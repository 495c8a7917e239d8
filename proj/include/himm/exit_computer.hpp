// Optimal exit costs: augmented machines, per-machine Dijkstra, and the
// incremental recomputation over the marked subtree.
#pragma once

#include <optional>
#include <set>
#include <vector>

#include "himm/core.hpp"

namespace himm {

using MarkSet = std::set<MachineId>;

// One step of a trajectory inside an augmented machine. The final step's
// input is the exit input; its (virtual) target is implied.
struct AugmentedStep {
  NodeId state = kNoNode;
  Input input = 0;
};
using AugmentedPath = std::vector<AugmentedStep>;

struct ExitEntry {
  std::vector<Cost> costs;                        // per input
  std::vector<std::optional<AugmentedPath>> trajs;  // present iff cost finite
  bool valid = false;
};

class ExitTable {
 public:
  ExitEntry& at(MachineId m) {
    if (static_cast<std::size_t>(m) >= entries_.size()) entries_.resize(m + 1);
    return entries_[static_cast<std::size_t>(m)];
  }
  const ExitEntry& at(MachineId m) const { return entries_.at(static_cast<std::size_t>(m)); }
  bool has(MachineId m) const {
    return m >= 0 && static_cast<std::size_t>(m) < entries_.size() &&
           entries_[static_cast<std::size_t>(m)].valid;
  }
  void invalidate(MachineId m) { at(m).valid = false; }
  void reset(MachineId m) { at(m) = ExitEntry{}; }
  void clear() { entries_.clear(); }

 private:
  std::vector<ExitEntry> entries_;  // indexed by MachineId
};

// M extended with one virtual exit state per input: every locally undefined
// (state, input) pair leads to that input's exit state, and edge weights are
// inflated by the child exit cost of the source state (zero for flat states).
// delta_hat is total on states x inputs; exit states are sinks.
struct AugmentedMachine {
  MachineId base = kNoMachine;
  std::int32_t n_states = 0;  // real states; exit node for input x is n_states + x
  std::int32_t n_inputs = 0;
  std::int32_t start = 0;                // local index
  std::vector<NodeId> states;            // local index -> node id
  std::vector<std::int32_t> delta_hat;   // dense, always defined
  std::vector<Cost> gamma_hat;           // may be infinite

  bool is_exit(std::int32_t v) const { return v >= n_states; }
  std::int32_t exit_node(Input x) const { return n_states + x; }
  std::int32_t target(std::int32_t local, Input x) const {
    return delta_hat[static_cast<std::size_t>(local) * n_inputs + x];
  }
  Cost weight(std::int32_t local, Input x) const {
    return gamma_hat[static_cast<std::size_t>(local) * n_inputs + x];
  }
};

// Requires valid exit entries for every machine refining a state of m.
AugmentedMachine build_augmented(const Hierarchy& h, MachineId m, const ExitTable& table);

struct ExitSearchResult {
  std::vector<Cost> costs;
  std::vector<std::optional<AugmentedPath>> trajs;
};

// Dijkstra from the start state to every exit state. Ties are broken by
// smallest predecessor node id, then smallest input id, so the returned
// trajectories are deterministic.
ExitSearchResult dijkstra_exits(const AugmentedMachine& aug);

// Recomputes exactly the marked machines, children first (Algorithm-style
// top-down skip of unmarked subtrees), and empties the marks. Returns the
// number of machines recomputed.
int compute_optimal_exits(const Hierarchy& h, MarkSet& marks, ExitTable& table);

// Primitive input sequence realizing the optimal (m, x)-exit: starting at
// resolve_start(m), all but the last input position the system at internal
// cost exactly costs[m][x], and the last input is x, escaping m's subtree.
// Throws if the entry is infinite or stale.
std::vector<Input> expand_exit_trajectory(const Hierarchy& h, const ExitTable& table,
                                          MachineId m, Input x);

// Internal part only (everything but the final exit input). Used by the
// planner, exposed for tests.
void append_exit_internal(const Hierarchy& h, const ExitTable& table, MachineId m, Input x,
                          std::vector<Input>& out);

}  // namespace himm
