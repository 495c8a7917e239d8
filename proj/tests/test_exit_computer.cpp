#include <doctest.h>

#include <stdexcept>

#include "himm/exit_computer.hpp"
#include "himm/modifications.hpp"
#include "support/fixtures.hpp"
#include "support/naive.hpp"
#include "support/random_model.hpp"

using namespace himm;
using namespace himm::test;

namespace {

constexpr double kTol = 1e-9;

struct Computed {
  Hierarchy h;
  MarkSet marks;
  ExitTable table;
};

Computed computed_toy2() {
  Toy2 t = toy2();
  Computed c;
  c.h = std::move(t.h);
  c.marks = init_marks(c.h);
  compute_optimal_exits(c.h, c.marks, c.table);
  return c;
}

// Replays an augmented trajectory through the augmented machine and sums the
// edge weights it traverses.
Cost replay_augmented(const AugmentedMachine& aug, const AugmentedPath& path, Input exit_input) {
  Cost total = 0;
  std::int32_t at = aug.start;
  for (std::size_t i = 0; i < path.size(); ++i) {
    REQUIRE(aug.states[static_cast<std::size_t>(at)] == path[i].state);
    total += aug.weight(at, path[i].input);
    std::int32_t to = aug.target(at, path[i].input);
    if (i + 1 == path.size()) {
      CHECK(to == aug.exit_node(exit_input));
    } else {
      REQUIRE_FALSE(aug.is_exit(to));
      at = to;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("build_augmented applies the two case formulas") {
  Toy2 t = toy2();
  MarkSet marks = init_marks(t.h);
  ExitTable table;
  compute_optimal_exits(t.h, marks, table);

  AugmentedMachine n = build_augmented(t.h, t.N, table);
  std::int32_t b = t.h.node(t.b).local, c = t.h.node(t.c).local;
  CHECK(n.target(b, t.g) == n.exit_node(t.g));
  CHECK(n.weight(b, t.g) == 0);
  CHECK(n.target(b, t.hh) == c);
  CHECK(n.weight(b, t.hh) == 1);
  CHECK(n.target(c, t.g) == n.exit_node(t.g));
  CHECK(n.weight(c, t.g) == 0);
  CHECK(n.target(c, t.hh) == n.exit_node(t.hh));
  CHECK(n.weight(c, t.hh) == 0);

  AugmentedMachine r = build_augmented(t.h, t.R, table);
  std::int32_t a = t.h.node(t.a).local, m = t.h.node(t.m).local;
  CHECK(r.target(a, t.g) == m);
  CHECK(r.weight(a, t.g) == 2);  // flat source: child exit cost 0
  CHECK(r.target(m, t.g) == a);
  CHECK(r.weight(m, t.g) == 3);  // c_g^N = 0
  CHECK(r.target(m, t.hh) == r.exit_node(t.hh));
  CHECK(r.weight(m, t.hh) == 1);  // c_h^N = 1
  CHECK(r.target(a, t.hh) == r.exit_node(t.hh));
  CHECK(r.weight(a, t.hh) == 0);
}

TEST_CASE("a total transition function leaves every exit state unreachable") {
  Hierarchy h({"g"});
  MachineId m = h.add_root_machine("total");
  NodeId q1 = h.add_state(m, "q1");
  NodeId q2 = h.add_state(m, "q2");
  h.set_start(m, q1);
  h.set_transition(m, q1, 0, q2, 1);
  h.set_transition(m, q2, 0, q1, 1);
  MarkSet marks = init_marks(h);
  ExitTable table;
  compute_optimal_exits(h, marks, table);
  AugmentedMachine aug = build_augmented(h, m, table);
  for (std::int32_t s = 0; s < aug.n_states; ++s) CHECK_FALSE(aug.is_exit(aug.target(s, 0)));
  CHECK(is_infinite(table.at(m).costs[0]));
  CHECK_FALSE(table.at(m).trajs[0].has_value());
}

TEST_CASE("dijkstra_exits on the fixtures") {
  Computed c = computed_toy2();
  Toy2 t = toy2();
  CHECK(c.table.at(t.N).costs[t.g] == 0);
  CHECK(c.table.at(t.N).costs[t.hh] == 1);
  CHECK(is_infinite(c.table.at(t.R).costs[t.g]));
  CHECK(c.table.at(t.R).costs[t.hh] == 0);

  // A single-flat-state machine with empty delta exits at zero cost everywhere.
  Hierarchy h({"g", "h"});
  MachineId m = h.add_root_machine("single");
  h.add_state(m, "only");
  MarkSet marks = init_marks(h);
  ExitTable table;
  compute_optimal_exits(h, marks, table);
  for (Input x = 0; x < 2; ++x) CHECK(table.at(m).costs[x] == 0);
}

TEST_CASE("compute_optimal_exits recomputes only the marked subtree") {
  Computed c = computed_toy2();
  Toy2 t = toy2();

  // Everything valid: nothing left to do.
  CHECK(compute_optimal_exits(c.h, c.marks, c.table) == 0);

  // Arc modification on N marks {N, R}: exactly two recomputations.
  ArcModification mod;
  mod.machine = t.N;
  mod.start = t.b;
  mod.arcs = machine_arcs(c.h, t.N);
  apply_and_mark(c.h, c.marks, c.table, std::move(mod));
  CHECK(c.marks == MarkSet{t.N, t.R});
  CHECK(compute_optimal_exits(c.h, c.marks, c.table) == 2);
  CHECK(c.marks.empty());
}

TEST_CASE("exit trajectories replay to their costs in the augmented machine") {
  Computed c = computed_toy2();
  for (MachineId m : c.h.machine_ids()) {
    AugmentedMachine aug = build_augmented(c.h, m, c.table);
    for (Input x = 0; x < c.h.n_inputs(); ++x) {
      const ExitEntry& entry = c.table.at(m);
      REQUIRE(entry.valid);
      if (is_infinite(entry.costs[static_cast<std::size_t>(x)])) {
        CHECK_FALSE(entry.trajs[static_cast<std::size_t>(x)].has_value());
        continue;
      }
      REQUIRE(entry.trajs[static_cast<std::size_t>(x)].has_value());
      Cost replayed = replay_augmented(aug, *entry.trajs[static_cast<std::size_t>(x)], x);
      CHECK(replayed == doctest::Approx(entry.costs[static_cast<std::size_t>(x)]).epsilon(kTol));
    }
  }
}

TEST_CASE("expand_exit_trajectory yields full exit input sequences") {
  Computed c = computed_toy2();
  Toy2 t = toy2();

  std::vector<Input> h_exit = expand_exit_trajectory(c.h, c.table, t.N, t.hh);
  CHECK(h_exit == std::vector<Input>{t.hh, t.hh});
  // All but the final input replay inside the machine at the table cost.
  RunResult r = run_plan(c.h, resolve_start(c.h, t.N),
                         std::vector<Input>(h_exit.begin(), h_exit.end() - 1));
  CHECK(r.cost == doctest::Approx(c.table.at(t.N).costs[t.hh]).epsilon(kTol));

  std::vector<Input> g_exit = expand_exit_trajectory(c.h, c.table, t.N, t.g);
  CHECK(g_exit == std::vector<Input>{t.g});

  CHECK_THROWS_AS(expand_exit_trajectory(c.h, c.table, t.R, t.g), std::invalid_argument);
}

TEST_CASE("expanded exit trajectories replay to the table cost on random models") {
  ModelGen gen(41);
  int checked = 0;
  for (int i = 0; i < 30; ++i) {
    Hierarchy h = gen.hierarchy();
    MarkSet marks = init_marks(h);
    ExitTable table;
    compute_optimal_exits(h, marks, table);
    for (MachineId m : h.machine_ids()) {
      for (Input x = 0; x < h.n_inputs(); ++x) {
        if (is_infinite(table.at(m).costs[static_cast<std::size_t>(x)])) continue;
        std::vector<Input> full = expand_exit_trajectory(h, table, m, x);
        REQUIRE(!full.empty());
        CHECK(full.back() == x);
        NodeId from = resolve_start(h, m);
        RunResult internal =
            run_plan(h, from, std::vector<Input>(full.begin(), full.end() - 1));
        CHECK(internal.cost ==
              doctest::Approx(table.at(m).costs[static_cast<std::size_t>(x)]).epsilon(kTol));
        // The final input escapes m's subtree.
        CHECK(naive_escapes(h, m, internal.final_state, x));
        ++checked;
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("exit costs match the brute-force oracle on random models") {
  ModelGen gen(43);
  for (int i = 0; i < 30; ++i) {
    Hierarchy h = gen.hierarchy();
    MarkSet marks = init_marks(h);
    ExitTable table;
    compute_optimal_exits(h, marks, table);
    for (MachineId m : h.machine_ids()) {
      for (Input x = 0; x < h.n_inputs(); ++x) {
        Cost want = naive_exit_cost(h, m, x);
        Cost got = table.at(m).costs[static_cast<std::size_t>(x)];
        if (is_infinite(want)) {
          CHECK(is_infinite(got));
        } else {
          CHECK(got == doctest::Approx(want).epsilon(kTol));
        }
      }
    }
  }
}

TEST_CASE("infinite child exit costs propagate as omitted edges") {
  // Child machine where input g never escapes; the root's only state refines
  // it, so the root's g-exit must come out infinite rather than zero.
  Hierarchy h({"g", "h"});
  MachineId root = h.add_root_machine("root");
  NodeId top = h.add_state(root, "top");
  h.set_start(root, top);
  MachineId child = h.add_child_machine(top, "child");
  NodeId c1 = h.add_state(child, "c1");
  NodeId c2 = h.add_state(child, "c2");
  h.set_start(child, c1);
  h.set_transition(child, c1, 0, c2, 1);  // g total inside the child
  h.set_transition(child, c2, 0, c1, 1);

  MarkSet marks = init_marks(h);
  ExitTable table;
  compute_optimal_exits(h, marks, table);
  CHECK(is_infinite(table.at(child).costs[0]));
  CHECK(table.at(child).costs[1] == 0);  // h undefined at the child start
  AugmentedMachine aug = build_augmented(h, root, table);
  CHECK(is_infinite(aug.weight(h.node(top).local, 0)));
  CHECK(is_infinite(table.at(root).costs[0]));
  CHECK(table.at(root).costs[1] == 0);
}

TEST_CASE("equal-cost exits pick the smallest predecessor deterministically") {
  // Two zero-cost routes reach E_g: directly from q1 and via q2. The tie at
  // E_g must resolve to the smaller (node id, input) predecessor, and the
  // result must not depend on how often it is computed.
  Hierarchy h({"g", "h"});
  MachineId m = h.add_root_machine("ties");
  NodeId q1 = h.add_state(m, "q1");
  NodeId q2 = h.add_state(m, "q2");
  h.set_start(m, q1);
  h.set_transition(m, q1, 1, q2, 0);  // h: q1 -> q2 at zero cost

  MarkSet marks = init_marks(h);
  ExitTable table;
  compute_optimal_exits(h, marks, table);
  REQUIRE(table.at(m).costs[0] == 0);
  const AugmentedPath& path = *table.at(m).trajs[0];
  REQUIRE(path.size() == 1);
  CHECK(path[0].state == q1);  // q1 < q2

  for (int i = 0; i < 3; ++i) {
    MarkSet again = init_marks(h);
    ExitTable t2;
    compute_optimal_exits(h, again, t2);
    const AugmentedPath& p2 = *t2.at(m).trajs[0];
    REQUIRE(p2.size() == path.size());
    CHECK(p2[0].state == path[0].state);
    CHECK(p2[0].input == path[0].input);
  }
}

TEST_CASE("incremental recomputation equals building the table from scratch") {
  ModelGen gen(47);
  for (int i = 0; i < 20; ++i) {
    Hierarchy h = gen.hierarchy();
    MarkSet marks = init_marks(h);
    ExitTable table;
    compute_optimal_exits(h, marks, table);
    for (int b = gen.pick(1, 4); b-- > 0;) apply_and_mark(h, marks, table, gen.modification(h));
    compute_optimal_exits(h, marks, table);
    CHECK(marks.empty());

    MarkSet fresh_marks = init_marks(h);
    ExitTable fresh;
    compute_optimal_exits(h, fresh_marks, fresh);
    for (MachineId m : h.machine_ids()) {
      for (Input x = 0; x < h.n_inputs(); ++x) {
        Cost a = table.at(m).costs[static_cast<std::size_t>(x)];
        Cost b2 = fresh.at(m).costs[static_cast<std::size_t>(x)];
        if (is_infinite(a)) {
          CHECK(is_infinite(b2));
        } else {
          CHECK(a == doctest::Approx(b2).epsilon(kTol));
        }
        CHECK(table.at(m).trajs[static_cast<std::size_t>(x)].has_value() ==
              fresh.at(m).trajs[static_cast<std::size_t>(x)].has_value());
      }
    }
  }
}
