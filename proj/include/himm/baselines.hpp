// Comparison planners: exhaustive flattening to an explicit weighted labeled
// graph, plain Dijkstra over it, and Contraction Hierarchies with lazy
// edge-difference ordering and capped witness searches.
#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "himm/core.hpp"

namespace himm {

struct FlatGraph {
  struct Edge {
    std::int32_t to = -1;
    Input input = 0;
    Cost cost = 0;
  };

  std::vector<NodeId> vertices;  // flat states, ascending
  std::unordered_map<NodeId, std::int32_t> index;
  std::vector<std::vector<Edge>> adj;

  std::int32_t vertex_index(NodeId q) const { return index.at(q); }
};

// Exhaustive application of the hierarchical transition over flat states.
FlatGraph flatten(const Hierarchy& h);

// Assembles a graph directly from edges; used for synthetic test inputs.
// Each (vertex, input) pair may carry at most one edge.
FlatGraph make_flat_graph(std::int32_t n_vertices,
                          const std::vector<std::tuple<std::int32_t, Input, std::int32_t, Cost>>& edges);

struct SearchResult {
  Cost cost = kInfiniteCost;
  std::vector<Input> plan;
};

SearchResult dijkstra_flat(const FlatGraph& g, NodeId from, NodeId to);

// Contraction Hierarchies index: a contraction rank per vertex plus the
// original edges and the shortcuts added while contracting. Shortcut edges
// remember the two edges they bypass for unpacking.
struct CHIndex {
  struct Edge {
    std::int32_t from = -1;
    std::int32_t to = -1;
    Cost cost = 0;
    Input input = 0;          // original edges only
    std::int32_t skip1 = -1;  // >= 0 marks a shortcut
    std::int32_t skip2 = -1;

    bool shortcut() const { return skip1 >= 0; }
  };

  std::vector<NodeId> vertices;
  std::unordered_map<NodeId, std::int32_t> index;
  std::vector<std::int32_t> rank;
  std::vector<Edge> edges;
  std::vector<std::vector<std::int32_t>> up_out;  // edge ids leaving v upward
  std::vector<std::vector<std::int32_t>> up_in;   // edge ids entering v from above
  std::size_t shortcut_count = 0;
};

CHIndex ch_preprocess(const FlatGraph& g);

SearchResult ch_query(const CHIndex& idx, NodeId from, NodeId to);

}  // namespace himm
