#include "himm/exit_computer.hpp"

#include <algorithm>
#include <cassert>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace himm {

AugmentedMachine build_augmented(const Hierarchy& h, MachineId m, const ExitTable& table) {
  const MealyMachine& mm = h.machine(m);
  AugmentedMachine aug;
  aug.base = m;
  aug.n_states = mm.n_states();
  aug.n_inputs = mm.n_inputs;
  aug.start = mm.start;
  aug.states = mm.states;
  aug.delta_hat.resize(static_cast<std::size_t>(aug.n_states) * aug.n_inputs);
  aug.gamma_hat.resize(aug.delta_hat.size());
  for (std::int32_t s = 0; s < aug.n_states; ++s) {
    const NodeInfo& info = h.node(mm.states[static_cast<std::size_t>(s)]);
    const ExitEntry* child = nullptr;
    if (!info.flat()) {
      child = &table.at(info.child);
      if (!child->valid)
        throw std::logic_error("exit entry for child machine is stale: " +
                               h.machine(info.child).label);
    }
    for (Input x = 0; x < aug.n_inputs; ++x) {
      Cost exit_cost = child ? child->costs[static_cast<std::size_t>(x)] : 0.0;
      std::size_t k = static_cast<std::size_t>(s) * aug.n_inputs + x;
      if (mm.defined(s, x)) {
        aug.delta_hat[k] = mm.target(s, x);
        aug.gamma_hat[k] = exit_cost + mm.weight(s, x);
      } else {
        aug.delta_hat[k] = aug.exit_node(x);
        aug.gamma_hat[k] = exit_cost;
      }
    }
  }
  return aug;
}

ExitSearchResult dijkstra_exits(const AugmentedMachine& aug) {
  const std::int32_t n = aug.n_states + aug.n_inputs;
  std::vector<Cost> dist(static_cast<std::size_t>(n), kInfiniteCost);
  std::vector<std::pair<std::int32_t, Input>> pred(static_cast<std::size_t>(n), {-1, -1});
  std::vector<bool> settled(static_cast<std::size_t>(n), false);

  using Item = std::pair<Cost, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[static_cast<std::size_t>(aug.start)] = 0;
  heap.emplace(0.0, aug.start);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(v)]) continue;
    settled[static_cast<std::size_t>(v)] = true;
    if (aug.is_exit(v)) continue;  // exit states are sinks
    for (Input x = 0; x < aug.n_inputs; ++x) {
      Cost w = aug.weight(v, x);
      if (is_infinite(w)) continue;  // infinite child exit cost: edge omitted
      std::int32_t t = aug.target(v, x);
      if (settled[static_cast<std::size_t>(t)]) continue;  // pred frozen at settle
      Cost nd = d + w;
      Cost& cur = dist[static_cast<std::size_t>(t)];
      auto& p = pred[static_cast<std::size_t>(t)];
      if (nd < cur) {
        cur = nd;
        p = {v, x};
        heap.emplace(nd, t);
      } else if (nd == cur && p.first >= 0) {
        std::pair<NodeId, Input> cand{aug.states[static_cast<std::size_t>(v)], x};
        std::pair<NodeId, Input> old{aug.states[static_cast<std::size_t>(p.first)], p.second};
        if (cand < old) p = {v, x};
      }
    }
  }

  ExitSearchResult out;
  out.costs.resize(static_cast<std::size_t>(aug.n_inputs), kInfiniteCost);
  out.trajs.resize(static_cast<std::size_t>(aug.n_inputs));
  for (Input x = 0; x < aug.n_inputs; ++x) {
    std::int32_t e = aug.exit_node(x);
    Cost c = dist[static_cast<std::size_t>(e)];
    out.costs[static_cast<std::size_t>(x)] = c;
    if (is_infinite(c)) continue;
    AugmentedPath path;
    for (std::int32_t v = e;;) {
      auto [pv, px] = pred[static_cast<std::size_t>(v)];
      if (pv < 0) break;  // the start state keeps no predecessor
      path.push_back({aug.states[static_cast<std::size_t>(pv)], px});
      v = pv;
    }
    std::reverse(path.begin(), path.end());
    out.trajs[static_cast<std::size_t>(x)] = std::move(path);
  }
  return out;
}

int compute_optimal_exits(const Hierarchy& h, MarkSet& marks, ExitTable& table) {
  int recomputed = 0;
  // Explicit stack, post-order: children of a marked machine first.
  struct Frame {
    MachineId m;
    bool expanded;
  };
  std::vector<Frame> stack{{h.root(), false}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (!marks.count(f.m)) continue;  // cached values still valid below here
    if (!f.expanded) {
      stack.push_back({f.m, true});
      const MealyMachine& mm = h.machine(f.m);
      for (std::size_t i = mm.states.size(); i-- > 0;) {
        const NodeInfo& info = h.node(mm.states[i]);
        if (!info.flat()) stack.push_back({info.child, false});
      }
      continue;
    }
    AugmentedMachine aug = build_augmented(h, f.m, table);
    ExitSearchResult res = dijkstra_exits(aug);
    ExitEntry& entry = table.at(f.m);
    entry.costs = std::move(res.costs);
    entry.trajs = std::move(res.trajs);
    entry.valid = true;
    marks.erase(f.m);
    ++recomputed;
  }
  return recomputed;
}

void append_exit_internal(const Hierarchy& h, const ExitTable& table, MachineId m, Input x,
                          std::vector<Input>& out) {
  const ExitEntry& entry = table.at(m);
  if (!entry.valid) throw std::logic_error("exit entry is stale: " + h.machine(m).label);
  const auto& traj = entry.trajs[static_cast<std::size_t>(x)];
  if (!traj)
    throw std::invalid_argument("no finite exit from machine " + h.machine(m).label +
                                " with input " + h.alphabet()[static_cast<std::size_t>(x)]);
  for (std::size_t i = 0; i < traj->size(); ++i) {
    const AugmentedStep& s = (*traj)[i];
    const NodeInfo& info = h.node(s.state);
    if (!info.flat()) append_exit_internal(h, table, info.child, s.input, out);
    if (i + 1 < traj->size()) out.push_back(s.input);
  }
}

std::vector<Input> expand_exit_trajectory(const Hierarchy& h, const ExitTable& table,
                                          MachineId m, Input x) {
  std::vector<Input> out;
  append_exit_internal(h, table, m, x, out);
  out.push_back(x);
  return out;
}

}  // namespace himm
