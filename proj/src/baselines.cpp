#include "himm/baselines.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace himm {

FlatGraph flatten(const Hierarchy& h) {
  FlatGraph g;
  g.vertices = h.flat_states();
  for (std::size_t i = 0; i < g.vertices.size(); ++i)
    g.index.emplace(g.vertices[i], static_cast<std::int32_t>(i));
  g.adj.resize(g.vertices.size());
  for (std::size_t i = 0; i < g.vertices.size(); ++i) {
    for (Input x = 0; x < h.n_inputs(); ++x) {
      auto s = step(h, g.vertices[i], x);
      if (s) g.adj[i].push_back({g.index.at(s->to), x, s->cost});
    }
  }
  return g;
}

FlatGraph make_flat_graph(
    std::int32_t n_vertices,
    const std::vector<std::tuple<std::int32_t, Input, std::int32_t, Cost>>& edges) {
  FlatGraph g;
  g.vertices.resize(static_cast<std::size_t>(n_vertices));
  for (std::int32_t i = 0; i < n_vertices; ++i) {
    g.vertices[static_cast<std::size_t>(i)] = i;
    g.index.emplace(i, i);
  }
  g.adj.resize(static_cast<std::size_t>(n_vertices));
  for (const auto& [from, input, to, cost] : edges) {
    for (const FlatGraph::Edge& e : g.adj[static_cast<std::size_t>(from)])
      if (e.input == input) throw std::invalid_argument("duplicate (vertex, input) edge");
    g.adj[static_cast<std::size_t>(from)].push_back({to, input, cost});
  }
  return g;
}

SearchResult dijkstra_flat(const FlatGraph& g, NodeId from, NodeId to) {
  std::int32_t s = g.vertex_index(from);
  std::int32_t t = g.vertex_index(to);
  const std::size_t n = g.vertices.size();
  std::vector<Cost> dist(n, kInfiniteCost);
  std::vector<std::pair<std::int32_t, std::int32_t>> pred(n, {-1, -1});
  std::vector<bool> settled(n, false);

  using Item = std::pair<Cost, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[static_cast<std::size_t>(s)] = 0;
  heap.emplace(0.0, s);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(v)]) continue;
    settled[static_cast<std::size_t>(v)] = true;
    if (v == t) break;
    const auto& edges = g.adj[static_cast<std::size_t>(v)];
    for (std::size_t e = 0; e < edges.size(); ++e) {
      std::int32_t w = edges[e].to;
      if (settled[static_cast<std::size_t>(w)]) continue;
      Cost nd = d + edges[e].cost;
      if (nd < dist[static_cast<std::size_t>(w)]) {
        dist[static_cast<std::size_t>(w)] = nd;
        pred[static_cast<std::size_t>(w)] = {v, static_cast<std::int32_t>(e)};
        heap.emplace(nd, w);
      }
    }
  }

  SearchResult out;
  out.cost = dist[static_cast<std::size_t>(t)];
  if (is_infinite(out.cost)) return out;
  for (std::int32_t v = t; v != s;) {
    auto [pv, pe] = pred[static_cast<std::size_t>(v)];
    out.plan.push_back(g.adj[static_cast<std::size_t>(pv)][static_cast<std::size_t>(pe)].input);
    v = pv;
  }
  std::reverse(out.plan.begin(), out.plan.end());
  return out;
}

// -- contraction hierarchies ---------------------------------------------------

namespace {

// Scratch state shared by the witness searches during preprocessing.
struct WitnessScratch {
  std::vector<Cost> dist;
  std::vector<std::uint32_t> stamp;
  std::uint32_t now = 0;

  void resize(std::size_t n) {
    dist.assign(n, kInfiniteCost);
    stamp.assign(n, 0);
  }
  void begin() { ++now; }
  Cost get(std::int32_t v) const {
    return stamp[static_cast<std::size_t>(v)] == now ? dist[static_cast<std::size_t>(v)]
                                                     : kInfiniteCost;
  }
  void set(std::int32_t v, Cost c) {
    stamp[static_cast<std::size_t>(v)] = now;
    dist[static_cast<std::size_t>(v)] = c;
  }
};

struct Shortcut {
  std::int32_t from, to;
  Cost cost;
  std::int32_t skip1, skip2;
};

class Contractor {
 public:
  explicit Contractor(const FlatGraph& g) {
    n_ = static_cast<std::int32_t>(g.vertices.size());
    out_.resize(static_cast<std::size_t>(n_));
    in_.resize(static_cast<std::size_t>(n_));
    contracted_.assign(static_cast<std::size_t>(n_), false);
    contracted_neighbors_.assign(static_cast<std::size_t>(n_), 0);
    rank_.assign(static_cast<std::size_t>(n_), -1);
    scratch_.resize(static_cast<std::size_t>(n_));
    for (std::int32_t v = 0; v < n_; ++v)
      for (const FlatGraph::Edge& e : g.adj[static_cast<std::size_t>(v)])
        add_edge({v, e.to, e.cost, e.input, -1, -1});
  }

  void run() {
    using Item = std::pair<std::int64_t, std::int32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    std::vector<Shortcut> shortcuts;
    for (std::int32_t v = 0; v < n_; ++v) {
      simulate(v, &shortcuts);
      heap.emplace(priority_of(v, shortcuts.size()), v);
    }
    std::int32_t next_rank = 0;
    while (!heap.empty()) {
      auto [p, v] = heap.top();
      heap.pop();
      if (contracted_[static_cast<std::size_t>(v)]) continue;
      // Lazy update: recompute before committing; reinsert if it lost.
      simulate(v, &shortcuts);
      std::int64_t fresh = priority_of(v, shortcuts.size());
      if (!heap.empty() && fresh > heap.top().first) {
        heap.emplace(fresh, v);
        continue;
      }
      for (const Shortcut& s : shortcuts) {
        add_edge({s.from, s.to, s.cost, -1, s.skip1, s.skip2});
        ++shortcut_count_;
      }
      contracted_[static_cast<std::size_t>(v)] = true;
      rank_[static_cast<std::size_t>(v)] = next_rank++;
      for (std::int32_t u : distinct_uncontracted_neighbors(v))
        ++contracted_neighbors_[static_cast<std::size_t>(u)];
    }
  }

  std::vector<CHIndex::Edge> take_edges() { return std::move(edges_); }
  std::vector<std::int32_t> take_ranks() { return std::move(rank_); }
  std::size_t shortcut_count() const { return shortcut_count_; }

 private:
  static constexpr int kWitnessCap = 20;  // settled-node budget per search

  void add_edge(CHIndex::Edge e) {
    std::int32_t id = static_cast<std::int32_t>(edges_.size());
    out_[static_cast<std::size_t>(e.from)].push_back(id);
    in_[static_cast<std::size_t>(e.to)].push_back(id);
    edges_.push_back(e);
  }

  std::int64_t priority_of(std::int32_t v, std::size_t n_shortcuts) const {
    std::int64_t removed = 0;
    for (std::int32_t id : out_[static_cast<std::size_t>(v)])
      if (!contracted_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(id)].to)]) ++removed;
    for (std::int32_t id : in_[static_cast<std::size_t>(v)])
      if (!contracted_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(id)].from)])
        ++removed;
    return static_cast<std::int64_t>(n_shortcuts) - removed +
           contracted_neighbors_[static_cast<std::size_t>(v)];
  }

  std::vector<std::int32_t> distinct_uncontracted_neighbors(std::int32_t v) const {
    std::vector<std::int32_t> out;
    for (std::int32_t id : out_[static_cast<std::size_t>(v)])
      out.push_back(edges_[static_cast<std::size_t>(id)].to);
    for (std::int32_t id : in_[static_cast<std::size_t>(v)])
      out.push_back(edges_[static_cast<std::size_t>(id)].from);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    out.erase(std::remove_if(out.begin(), out.end(),
                             [&](std::int32_t u) {
                               return u == v || contracted_[static_cast<std::size_t>(u)];
                             }),
              out.end());
    return out;
  }

  // Capped Dijkstra from u in the uncontracted graph, avoiding `banned`.
  void witness_search(std::int32_t u, std::int32_t banned, Cost limit) {
    scratch_.begin();
    using Item = std::pair<Cost, std::int32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    scratch_.set(u, 0);
    heap.emplace(0.0, u);
    int settled = 0;
    while (!heap.empty() && settled < kWitnessCap) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > scratch_.get(v)) continue;  // stale entry
      if (d > limit) break;
      ++settled;
      for (std::int32_t id : out_[static_cast<std::size_t>(v)]) {
        const CHIndex::Edge& e = edges_[static_cast<std::size_t>(id)];
        if (e.to == banned || contracted_[static_cast<std::size_t>(e.to)]) continue;
        Cost nd = d + e.cost;
        if (nd < scratch_.get(e.to)) {
          scratch_.set(e.to, nd);
          heap.emplace(nd, e.to);
        }
      }
    }
  }

  // Determines the shortcuts contracting v would require. Parallel edges
  // collapse to the cheapest one for both witness limits and shortcut costs.
  void simulate(std::int32_t v, std::vector<Shortcut>* out) {
    out->clear();
    auto cheapest = [&](const std::vector<std::int32_t>& ids, bool incoming) {
      std::vector<std::pair<std::int32_t, std::int32_t>> best;  // (other vertex, edge id)
      for (std::int32_t id : ids) {
        const CHIndex::Edge& e = edges_[static_cast<std::size_t>(id)];
        std::int32_t other = incoming ? e.from : e.to;
        if (other == v || contracted_[static_cast<std::size_t>(other)]) continue;
        bool found = false;
        for (auto& [o, bid] : best) {
          if (o != other) continue;
          found = true;
          if (e.cost < edges_[static_cast<std::size_t>(bid)].cost) bid = id;
        }
        if (!found) best.emplace_back(other, id);
      }
      return best;
    };
    auto ins = cheapest(in_[static_cast<std::size_t>(v)], true);
    auto outs = cheapest(out_[static_cast<std::size_t>(v)], false);
    if (ins.empty() || outs.empty()) return;

    for (auto [u, in_id] : ins) {
      Cost c_in = edges_[static_cast<std::size_t>(in_id)].cost;
      Cost limit = 0;
      for (auto [w, out_id] : outs)
        if (w != u) limit = std::max(limit, c_in + edges_[static_cast<std::size_t>(out_id)].cost);
      witness_search(u, v, limit);
      for (auto [w, out_id] : outs) {
        if (w == u) continue;
        Cost via = c_in + edges_[static_cast<std::size_t>(out_id)].cost;
        if (scratch_.get(w) <= via) continue;  // witness beats the bypass
        out->push_back({u, w, via, in_id, out_id});
      }
    }
  }

  std::int32_t n_ = 0;
  std::vector<CHIndex::Edge> edges_;
  std::vector<std::vector<std::int32_t>> out_, in_;
  std::vector<bool> contracted_;
  std::vector<std::int32_t> contracted_neighbors_;
  std::vector<std::int32_t> rank_;
  WitnessScratch scratch_;
  std::size_t shortcut_count_ = 0;
};

}  // namespace

CHIndex ch_preprocess(const FlatGraph& g) {
  Contractor c(g);
  c.run();
  CHIndex idx;
  idx.vertices = g.vertices;
  idx.index = g.index;
  idx.rank = c.take_ranks();
  idx.edges = c.take_edges();
  idx.shortcut_count = c.shortcut_count();
  idx.up_out.resize(idx.vertices.size());
  idx.up_in.resize(idx.vertices.size());
  for (std::size_t id = 0; id < idx.edges.size(); ++id) {
    const CHIndex::Edge& e = idx.edges[id];
    if (e.from == e.to) continue;
    if (idx.rank[static_cast<std::size_t>(e.from)] < idx.rank[static_cast<std::size_t>(e.to)])
      idx.up_out[static_cast<std::size_t>(e.from)].push_back(static_cast<std::int32_t>(id));
    else
      idx.up_in[static_cast<std::size_t>(e.to)].push_back(static_cast<std::int32_t>(id));
  }
  return idx;
}

SearchResult ch_query(const CHIndex& idx, NodeId from, NodeId to) {
  std::int32_t s = idx.index.at(from);
  std::int32_t t = idx.index.at(to);
  SearchResult out;
  if (s == t) {
    out.cost = 0;
    return out;
  }

  const std::size_t n = idx.vertices.size();
  std::vector<Cost> df(n, kInfiniteCost), db(n, kInfiniteCost);
  std::vector<std::int32_t> pf(n, -1), pb(n, -1);  // pred edge ids

  auto search = [&](std::int32_t src, std::vector<Cost>& dist, std::vector<std::int32_t>& pred,
                    const std::vector<std::vector<std::int32_t>>& adj, bool forward) {
    using Item = std::pair<Cost, std::int32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[static_cast<std::size_t>(src)] = 0;
    heap.emplace(0.0, src);
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[static_cast<std::size_t>(v)]) continue;
      for (std::int32_t id : adj[static_cast<std::size_t>(v)]) {
        const CHIndex::Edge& e = idx.edges[static_cast<std::size_t>(id)];
        std::int32_t w = forward ? e.to : e.from;
        Cost nd = d + e.cost;
        if (nd < dist[static_cast<std::size_t>(w)]) {
          dist[static_cast<std::size_t>(w)] = nd;
          pred[static_cast<std::size_t>(w)] = id;
          heap.emplace(nd, w);
        }
      }
    }
  };
  search(s, df, pf, idx.up_out, true);
  search(t, db, pb, idx.up_in, false);

  std::int32_t meet = -1;
  Cost best = kInfiniteCost;
  for (std::size_t v = 0; v < n; ++v) {
    if (is_infinite(df[v]) || is_infinite(db[v])) continue;
    Cost c = df[v] + db[v];
    if (c < best || (c == best && meet >= 0 && static_cast<std::int32_t>(v) < meet)) {
      best = c;
      meet = static_cast<std::int32_t>(v);
    }
  }
  out.cost = best;
  if (is_infinite(best)) return out;

  std::vector<std::int32_t> path_edges;
  for (std::int32_t v = meet; v != s;) {
    std::int32_t id = pf[static_cast<std::size_t>(v)];
    path_edges.push_back(id);
    v = idx.edges[static_cast<std::size_t>(id)].from;
  }
  std::reverse(path_edges.begin(), path_edges.end());
  for (std::int32_t v = meet; v != t;) {
    std::int32_t id = pb[static_cast<std::size_t>(v)];
    path_edges.push_back(id);
    v = idx.edges[static_cast<std::size_t>(id)].to;
  }

  std::function<void(std::int32_t)> unpack = [&](std::int32_t id) {
    const CHIndex::Edge& e = idx.edges[static_cast<std::size_t>(id)];
    if (e.shortcut()) {
      unpack(e.skip1);
      unpack(e.skip2);
    } else {
      out.plan.push_back(e.input);
    }
  };
  for (std::int32_t id : path_edges) unpack(id);
  return out;
}

}  // namespace himm
