#include <doctest.h>

#include <algorithm>

#include "himm/baselines.hpp"
#include "himm/case_study.hpp"
#include "himm/modifications.hpp"
#include "himm/planner.hpp"
#include "support/fixtures.hpp"
#include "support/random_model.hpp"

using namespace himm;
using namespace himm::test;

namespace {

constexpr double kTol = 1e-9;

struct Ready {
  Hierarchy h;
  MarkSet marks;
  ExitTable table;
};

Ready ready(Hierarchy h) {
  Ready r;
  r.h = std::move(h);
  r.marks = init_marks(r.h);
  compute_optimal_exits(r.h, r.marks, r.table);
  return r;
}

}  // namespace

TEST_CASE("reduce keeps every state of the path machines") {
  Toy2 t = toy2();
  Ready r = ready(std::move(t.h));
  ReducedModel model = reduce(r.h, r.table, r.marks, t.b, t.a);
  CHECK(model.path_machines.size() == 2);
  REQUIRE(model.nodes.size() == 4);  // a, m, b, c
  CHECK(model.index.count(t.a));
  CHECK(model.index.count(t.m));
  CHECK(model.index.count(t.b));
  CHECK(model.index.count(t.c));
  for (const ReducedModel::Node& n : model.nodes) CHECK_FALSE(n.collapsed);

  // Bubbling resolved into a direct edge: b -g-> a at weight 3.
  const auto& edges = model.adj[static_cast<std::size_t>(model.index.at(t.b))];
  bool found = false;
  for (const auto& e : edges)
    if (e.input == t.g) {
      found = true;
      CHECK(e.to == model.index.at(t.a));
      CHECK(e.weight == 3);
    }
  CHECK(found);
}

TEST_CASE("reduce rejects pending marks") {
  Toy2 t = toy2();
  Ready r = ready(std::move(t.h));
  r.marks.insert(t.N);
  CHECK_THROWS_AS(reduce(r.h, r.table, r.marks, t.b, t.a), StaleTableError);
  CHECK_THROWS_AS(plan(r.h, r.table, r.marks, t.b, t.a), StaleTableError);
}

TEST_CASE("solve_reduced on the fixture pairs") {
  Toy2 t = toy2();
  Ready r = ready(std::move(t.h));

  auto cost_of = [&](NodeId from, NodeId to) {
    ReducedTrajectory traj = solve_reduced(reduce(r.h, r.table, r.marks, from, to));
    return traj.found ? traj.cost : kInfiniteCost;
  };
  CHECK(cost_of(t.b, t.a) == 3);
  CHECK(cost_of(t.a, t.c) == 3);
  CHECK(cost_of(t.c, t.c) == 0);
  CHECK(cost_of(t.a, t.a) == 0);
}

TEST_CASE("expand turns reduced steps into a primitive optimal plan") {
  Toy2 t = toy2();
  Ready r = ready(std::move(t.h));
  auto p = plan(r.h, r.table, r.marks, t.a, t.c);
  REQUIRE(p);
  CHECK(p->inputs == std::vector<Input>{t.g, t.hh});
  CHECK(p->cost == 3);
  RunResult replay = run_plan(r.h, t.a, p->inputs);
  CHECK(replay.final_state == t.c);
  CHECK(replay.cost == doctest::Approx(p->cost).epsilon(kTol));

  auto self = plan(r.h, r.table, r.marks, t.c, t.c);
  REQUIRE(self);
  CHECK(self->cost == 0);
  CHECK(self->inputs.empty());
}

TEST_CASE("plan matches the flattened oracle on all fixture pairs") {
  Toy2 t = toy2();
  Ready r = ready(std::move(t.h));
  FlatGraph g = flatten(r.h);
  for (NodeId from : r.h.flat_states()) {
    for (NodeId to : r.h.flat_states()) {
      SearchResult want = dijkstra_flat(g, from, to);
      auto got = plan(r.h, r.table, r.marks, from, to);
      if (is_infinite(want.cost)) {
        CHECK_FALSE(got.has_value());
      } else {
        REQUIRE(got);
        CHECK(got->cost == doctest::Approx(want.cost).epsilon(kTol));
        RunResult replay = run_plan(r.h, from, got->inputs);
        CHECK(replay.final_state == to);
        CHECK(replay.cost == doctest::Approx(got->cost).epsilon(kTol));
      }
    }
  }
}

TEST_CASE("plan matches the flattened oracle on random hierarchies") {
  ModelGen gen(53);
  for (int i = 0; i < 25; ++i) {
    Ready r = ready(gen.hierarchy());
    FlatGraph g = flatten(r.h);
    std::vector<NodeId> flats = r.h.flat_states();
    for (int k = 0; k < 40; ++k) {
      NodeId from = flats[static_cast<std::size_t>(gen.pick(0, static_cast<int>(flats.size()) - 1))];
      NodeId to = flats[static_cast<std::size_t>(gen.pick(0, static_cast<int>(flats.size()) - 1))];
      SearchResult want = dijkstra_flat(g, from, to);
      auto got = plan(r.h, r.table, r.marks, from, to);
      if (is_infinite(want.cost)) {
        CHECK_FALSE(got.has_value());
      } else {
        REQUIRE(got);
        CHECK(got->cost == doctest::Approx(want.cost).epsilon(kTol));
        RunResult replay = run_plan(r.h, from, got->inputs);
        CHECK(replay.final_state == to);
        CHECK(replay.cost == doctest::Approx(got->cost).epsilon(kTol));
      }
    }
  }
}

TEST_CASE("reduced models stay within the two-chain size budget") {
  ModelGen gen(59);
  for (int i = 0; i < 15; ++i) {
    Ready r = ready(gen.hierarchy());
    std::vector<NodeId> flats = r.h.flat_states();
    int b_s = 0;
    for (MachineId m : r.h.machine_ids()) b_s = std::max(b_s, r.h.machine(m).n_states());
    for (int k = 0; k < 10; ++k) {
      NodeId from = flats[static_cast<std::size_t>(gen.pick(0, static_cast<int>(flats.size()) - 1))];
      NodeId to = flats[static_cast<std::size_t>(gen.pick(0, static_cast<int>(flats.size()) - 1))];
      ReducedModel model = reduce(r.h, r.table, r.marks, from, to);
      CHECK(static_cast<int>(model.path_machines.size()) <= 2 * depth(r.h) - 1);
      CHECK(static_cast<int>(model.nodes.size()) <= (2 * depth(r.h) - 1) * b_s);
    }
  }
}

TEST_CASE("case-study reduction expands five machines and collapses the rest") {
  Hierarchy h = build_case_study();
  MarkSet marks = init_marks(h);
  ExitTable table;
  compute_optimal_exits(h, marks, table);
  const StudyDefinition& def = study_definition();
  NodeId from = *h.find_node(def.start);
  NodeId to = *h.find_node(def.goal(1));
  ReducedModel model = reduce(h, table, marks, from, to);
  CHECK(model.path_machines.size() == 5);  // root, two maps, two desks
  CHECK(model.nodes.size() == 10 + 101 + 101 + 91 + 91);
  std::size_t collapsed = 0;
  for (const ReducedModel::Node& n : model.nodes)
    if (n.collapsed) ++collapsed;
  CHECK(collapsed == 8 + 100 + 100);
}

TEST_CASE("streaming emits the expanded plan input by input") {
  Toy2 t = toy2();
  Ready r = ready(std::move(t.h));
  auto p = plan(r.h, r.table, r.marks, t.a, t.c);
  REQUIRE(p);
  PlanCursor cursor(r.h, r.table, p->steps);
  CHECK(*cursor.next() == t.g);
  CHECK(*cursor.next() == t.hh);
  CHECK_FALSE(cursor.next().has_value());
  CHECK_FALSE(cursor.next().has_value());  // stays exhausted

  auto empty = plan(r.h, r.table, r.marks, t.a, t.a);
  REQUIRE(empty);
  PlanCursor none(r.h, r.table, empty->steps);
  CHECK_FALSE(none.next().has_value());
}

TEST_CASE("streaming equals expansion and touches few frames on random models") {
  ModelGen gen(61);
  int collapsed_steps = 0;
  for (int i = 0; i < 20; ++i) {
    Ready r = ready(gen.hierarchy());
    std::vector<NodeId> flats = r.h.flat_states();
    int d = depth(r.h);
    for (int k = 0; k < 15; ++k) {
      NodeId from = flats[static_cast<std::size_t>(gen.pick(0, static_cast<int>(flats.size()) - 1))];
      NodeId to = flats[static_cast<std::size_t>(gen.pick(0, static_cast<int>(flats.size()) - 1))];
      auto p = plan(r.h, r.table, r.marks, from, to);
      if (!p) continue;
      for (const ReducedStep& s : p->steps) collapsed_steps += s.collapsed ? 1 : 0;
      PlanCursor cursor(r.h, r.table, p->steps);
      std::vector<Input> streamed;
      while (auto x = cursor.next()) {
        streamed.push_back(*x);
        CHECK(cursor.frames_touched() <= d);
      }
      CHECK(streamed == p->inputs);
    }
  }
  // The sweep must actually exercise exit-trajectory expansion.
  CHECK(collapsed_steps > 0);
}
