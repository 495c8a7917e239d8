// Shared hand-built hierarchies used across the test suites.
#pragma once

#include <string>

#include "himm/core.hpp"

namespace himm::test {

// Two-level fixture exercising descent-on-entry, bubbling and stopping:
// root R with flat state a (start) and state m refining machine N; N holds
// flat states b (start) and c. Transitions: a -g(2)-> m, m -g(3)-> a in R,
// b -h(1)-> c in N.
struct Toy2 {
  Hierarchy h;
  MachineId R, N;
  NodeId a, m, b, c;
  Input g, hh;
};

inline Toy2 toy2() {
  Toy2 t;
  t.h = Hierarchy({"g", "h"});
  t.g = 0;
  t.hh = 1;
  t.R = t.h.add_root_machine("R");
  t.a = t.h.add_state(t.R, "a");
  t.m = t.h.add_state(t.R, "m");
  t.h.set_start(t.R, t.a);
  t.N = t.h.add_child_machine(t.m, "N");
  t.b = t.h.add_state(t.N, "b");
  t.c = t.h.add_state(t.N, "c");
  t.h.set_start(t.N, t.b);
  t.h.set_transition(t.R, t.a, t.g, t.m, 2);
  t.h.set_transition(t.R, t.m, t.g, t.a, 3);
  t.h.set_transition(t.N, t.b, t.hh, t.c, 1);
  return t;
}

// Four-machine fixture: A holds states refining B and C; B holds a state
// refining D; C holds flat 5, 6; D holds flat 4, 7. The attested facts are
// s(D)=4, the 6 -x-> 5 transition in C, and A's B<->C transitions on y/x;
// the remaining details (extra state 7, costs, start states of A and C) are
// fixed here once.
struct Fig3 {
  Hierarchy h;
  MachineId A, B, C, D;
  NodeId nB, nC, nD, s4, s5, s6, s7;
  Input x, y;
};

inline Fig3 fig3() {
  Fig3 f;
  f.h = Hierarchy({"x", "y"});
  f.x = 0;
  f.y = 1;
  f.A = f.h.add_root_machine("A");
  f.nB = f.h.add_state(f.A, "B");
  f.nC = f.h.add_state(f.A, "C");
  f.h.set_start(f.A, f.nB);
  f.B = f.h.add_child_machine(f.nB, "B");
  f.nD = f.h.add_state(f.B, "D");
  f.h.set_start(f.B, f.nD);
  f.D = f.h.add_child_machine(f.nD, "D");
  f.s4 = f.h.add_state(f.D, "4");
  f.s7 = f.h.add_state(f.D, "7");
  f.h.set_start(f.D, f.s4);
  f.C = f.h.add_child_machine(f.nC, "C");
  f.s5 = f.h.add_state(f.C, "5");
  f.s6 = f.h.add_state(f.C, "6");
  f.h.set_start(f.C, f.s5);
  f.h.set_transition(f.A, f.nB, f.y, f.nC, 2);
  f.h.set_transition(f.A, f.nC, f.x, f.nB, 3);
  f.h.set_transition(f.C, f.s6, f.x, f.s5, 1);
  f.h.set_transition(f.D, f.s4, f.y, f.s7, 1);
  f.h.set_transition(f.D, f.s7, f.y, f.s4, 1);
  return f;
}

}  // namespace himm::test
