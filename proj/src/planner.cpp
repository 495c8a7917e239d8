#include "himm/planner.hpp"

#include <algorithm>
#include <cassert>
#include <queue>
#include <set>

namespace himm {

namespace {

std::set<MachineId> ancestor_chain(const Hierarchy& h, NodeId q) {
  std::set<MachineId> chain;
  for (MachineId m = h.node(q).machine;; m = h.machine(m).parent) {
    chain.insert(m);
    if (h.machine(m).parent == kNoMachine) break;
  }
  return chain;
}

}  // namespace

ReducedModel reduce(const Hierarchy& h, const ExitTable& table, const MarkSet& marks,
                    NodeId s_init, NodeId s_goal) {
  if (!marks.empty())
    throw StaleTableError("planning rejected: " + std::to_string(marks.size()) +
                          " machine(s) have stale exit costs");
  if (!h.node(s_init).flat() || !h.node(s_goal).flat())
    throw std::invalid_argument("planning endpoints must be flat states");

  ReducedModel r;
  std::set<MachineId> on_path = ancestor_chain(h, s_init);
  std::set<MachineId> goal_chain = ancestor_chain(h, s_goal);
  on_path.insert(goal_chain.begin(), goal_chain.end());
  r.path_machines.assign(on_path.begin(), on_path.end());

  for (MachineId m : r.path_machines) {
    for (NodeId q : h.machine(m).states) {
      const NodeInfo& info = h.node(q);
      ReducedModel::Node n;
      n.id = q;
      n.child = info.child;
      n.collapsed = !info.flat() && !on_path.count(info.child);
      r.index.emplace(q, static_cast<std::int32_t>(r.nodes.size()));
      r.nodes.push_back(n);
    }
  }
  r.adj.resize(r.nodes.size());

  // Entering a node lands on the first flat-or-collapsed state of its
  // resolve-start chain within the reduced world.
  auto landing = [&](NodeId v) {
    for (;;) {
      const NodeInfo& info = h.node(v);
      if (info.flat() || !on_path.count(info.child)) return r.index.at(v);
      v = h.machine(info.child).start_state();
    }
  };

  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const ReducedModel::Node& n = r.nodes[i];
    for (Input x = 0; x < h.n_inputs(); ++x) {
      // Cost of escaping the node's own subtree with x; zero for flat nodes.
      Cost exit_cost = 0;
      if (n.child != kNoMachine) {
        exit_cost = table.at(n.child).costs[static_cast<std::size_t>(x)];
        if (is_infinite(exit_cost)) continue;
      }
      // Resolve bubbling: the first ancestor level defining x pays its gamma.
      NodeId at = n.id;
      for (;;) {
        const NodeInfo& info = h.node(at);
        const MealyMachine& mm = h.machine(info.machine);
        if (mm.defined(info.local, x)) {
          NodeId v = mm.states[static_cast<std::size_t>(mm.target(info.local, x))];
          r.adj[i].push_back({landing(v), x, exit_cost + mm.weight(info.local, x)});
          break;
        }
        if (mm.parent == kNoMachine) break;  // the plan would stop here
        at = mm.parent_state;
      }
    }
  }

  r.source = r.index.at(s_init);
  r.goal = r.index.at(s_goal);
  return r;
}

ReducedTrajectory solve_reduced(const ReducedModel& r) {
  const std::size_t n = r.nodes.size();
  std::vector<Cost> dist(n, kInfiniteCost);
  std::vector<std::pair<std::int32_t, std::int32_t>> pred(n, {-1, -1});  // (node, edge idx)
  std::vector<bool> settled(n, false);

  using Item = std::pair<Cost, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[static_cast<std::size_t>(r.source)] = 0;
  heap.emplace(0.0, r.source);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(v)]) continue;
    settled[static_cast<std::size_t>(v)] = true;
    if (v == r.goal) break;
    const auto& edges = r.adj[static_cast<std::size_t>(v)];
    for (std::size_t e = 0; e < edges.size(); ++e) {
      std::int32_t t = edges[e].to;
      if (settled[static_cast<std::size_t>(t)]) continue;
      Cost nd = d + edges[e].weight;
      if (nd < dist[static_cast<std::size_t>(t)]) {
        dist[static_cast<std::size_t>(t)] = nd;
        pred[static_cast<std::size_t>(t)] = {v, static_cast<std::int32_t>(e)};
        heap.emplace(nd, t);
      }
    }
  }

  ReducedTrajectory out;
  if (is_infinite(dist[static_cast<std::size_t>(r.goal)])) return out;
  out.found = true;
  out.cost = dist[static_cast<std::size_t>(r.goal)];
  for (std::int32_t v = r.goal; v != r.source;) {
    auto [pv, pe] = pred[static_cast<std::size_t>(v)];
    const ReducedModel::Node& n = r.nodes[static_cast<std::size_t>(pv)];
    out.steps.push_back({n.id, n.collapsed, n.child, r.adj[static_cast<std::size_t>(pv)][pe].input});
    v = pv;
  }
  std::reverse(out.steps.begin(), out.steps.end());
  return out;
}

Plan expand(const Hierarchy& h, const ExitTable& table, const ReducedTrajectory& traj) {
  Plan p;
  p.cost = traj.cost;
  p.steps = traj.steps;
  for (const ReducedStep& s : traj.steps) {
    if (s.collapsed) append_exit_internal(h, table, s.child, s.input, p.inputs);
    p.inputs.push_back(s.input);
  }
  return p;
}

std::optional<Plan> plan(const Hierarchy& h, const ExitTable& table, const MarkSet& marks,
                         NodeId s_init, NodeId s_goal) {
  ReducedModel r = reduce(h, table, marks, s_init, s_goal);
  ReducedTrajectory traj = solve_reduced(r);
  if (!traj.found) return std::nullopt;
  return expand(h, table, traj);
}

PlanCursor::PlanCursor(const Hierarchy& h, const ExitTable& table,
                       std::span<const ReducedStep> steps)
    : h_(h), table_(table), steps_(steps) {}

void PlanCursor::push_frame(MachineId m, Input x, std::optional<Input> boundary) {
  const auto& traj = table_.at(m).trajs[static_cast<std::size_t>(x)];
  assert(traj);
  stack_.push_back({&*traj, 0, boundary, call_});
  ++frames_touched_;
}

void PlanCursor::touch(Frame& f) {
  if (f.seen_call != call_) {
    f.seen_call = call_;
    ++frames_touched_;
  }
}

std::optional<Input> PlanCursor::next() {
  ++call_;
  frames_touched_ = 0;
  for (;;) {
    if (!stack_.empty()) {
      Frame& f = stack_.back();
      touch(f);
      if (f.idx == f.path->size()) {
        std::optional<Input> boundary = f.boundary;
        stack_.pop_back();
        if (boundary) return boundary;
        continue;
      }
      const AugmentedStep& s = (*f.path)[f.idx++];
      bool exit_step = f.idx == f.path->size();
      const NodeInfo& info = h_.node(s.state);
      if (info.flat()) {
        if (exit_step) continue;  // the boundary input covers the exit
        return s.input;
      }
      push_frame(info.child, s.input, exit_step ? std::nullopt : std::optional<Input>(s.input));
      continue;
    }
    if (step_idx_ == steps_.size()) return std::nullopt;
    const ReducedStep& s = steps_[step_idx_++];
    if (!s.collapsed) return s.input;
    push_frame(s.child, s.input, s.input);
  }
}

}  // namespace himm
