// Query step: build the reduced model for a source/goal pair, solve it with
// Dijkstra, and expand the result into a primitive optimal plan, either
// eagerly or streamed one input at a time.
#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "himm/core.hpp"
#include "himm/exit_computer.hpp"

namespace himm {

// Thrown when planning is attempted while exit recomputations are pending.
struct StaleTableError : std::logic_error {
  using std::logic_error::logic_error;
};

// Truncation of the hierarchy for one query: the machines on the two
// ancestor chains are expanded, every other subtree is collapsed into a
// single node priced by its exit-cost row. Bubbling is resolved into direct
// weighted edges at build time, so solving is a plain shortest-path search.
struct ReducedModel {
  struct Node {
    NodeId id = kNoNode;
    bool collapsed = false;         // non-flat with an off-path child machine
    MachineId child = kNoMachine;   // the collapsed/expanded child, if any
  };
  struct Edge {
    std::int32_t to = -1;
    Input input = 0;
    Cost weight = 0;
  };

  std::vector<Node> nodes;
  std::vector<std::vector<Edge>> adj;
  std::unordered_map<NodeId, std::int32_t> index;
  std::vector<MachineId> path_machines;
  std::int32_t source = -1;
  std::int32_t goal = -1;
};

ReducedModel reduce(const Hierarchy& h, const ExitTable& table, const MarkSet& marks,
                    NodeId s_init, NodeId s_goal);

struct ReducedStep {
  NodeId node = kNoNode;
  bool collapsed = false;
  MachineId child = kNoMachine;
  Input input = 0;
};

struct ReducedTrajectory {
  bool found = false;
  std::vector<ReducedStep> steps;
  Cost cost = kInfiniteCost;
};

ReducedTrajectory solve_reduced(const ReducedModel& r);

struct Plan {
  std::vector<Input> inputs;
  Cost cost = 0;
  std::vector<ReducedStep> steps;  // reduced trajectory, drives the cursor
};

// Replaces every collapsed step by the exit trajectory of its child machine
// followed by the bubbled input; flat steps pass through.
Plan expand(const Hierarchy& h, const ExitTable& table, const ReducedTrajectory& traj);

// reduce -> solve -> expand. Returns nothing when the goal is unreachable.
std::optional<Plan> plan(const Hierarchy& h, const ExitTable& table, const MarkSet& marks,
                         NodeId s_init, NodeId s_goal);

// Streams the plan one primitive input per call, descending at most depth(Z)
// expansion frames per call. The hierarchy and table must outlive the cursor
// and stay unchanged while it is used.
class PlanCursor {
 public:
  PlanCursor(const Hierarchy& h, const ExitTable& table, std::span<const ReducedStep> steps);

  std::optional<Input> next();
  // Distinct expansion frames touched by the most recent next() call.
  int frames_touched() const { return frames_touched_; }

 private:
  struct Frame {
    const AugmentedPath* path = nullptr;
    std::size_t idx = 0;
    std::optional<Input> boundary;  // emitted when the frame is exhausted
    std::uint64_t seen_call = 0;
  };

  void push_frame(MachineId m, Input x, std::optional<Input> boundary);
  void touch(Frame& f);

  const Hierarchy& h_;
  const ExitTable& table_;
  std::span<const ReducedStep> steps_;
  std::size_t step_idx_ = 0;
  std::vector<Frame> stack_;
  std::uint64_t call_ = 0;
  int frames_touched_ = 0;
};

}  // namespace himm
