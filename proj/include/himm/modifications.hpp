// The four modification operators (state addition, state subtraction, arc
// modification, composition) and the marking discipline that records which
// machines need their exit costs recomputed.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "himm/core.hpp"
#include "himm/exit_computer.hpp"

namespace himm {

// A hierarchy bundled with its marks and exit table, used as a modification
// payload. Freshly built hierarchies are fully marked; a payload whose exits
// were already computed grafts as valid and costs nothing to recompute.
struct SubHierarchy {
  Hierarchy hierarchy;
  MarkSet marks;
  ExitTable table;

  static SubHierarchy fresh(Hierarchy h);
};

struct AddState {
  MachineId machine = kNoMachine;
  std::string name;
  std::optional<SubHierarchy> attached;
};

struct SubtractState {
  MachineId machine = kNoMachine;
  NodeId state = kNoNode;
};

struct ArcModification {
  MachineId machine = kNoMachine;
  std::vector<Hierarchy::Arc> arcs;
  NodeId start = kNoNode;
};

// Blueprint for a machine built from scratch (the composition root).
struct MachineDraft {
  std::string label;
  std::vector<std::string> states;
  std::string start;
  struct Arc {
    std::string from;
    Input input = 0;
    std::string to;
    Cost cost = 0;
  };
  std::vector<Arc> arcs;
};

// Marks the spot where the hierarchy being modified becomes a part of the
// composition.
struct CurrentHierarchy {};
using CompositionPart = std::variant<CurrentHierarchy, SubHierarchy>;

struct Composition {
  MachineDraft machine;
  std::vector<CompositionPart> parts;  // parts[i] grafts under state i
};

using Modification = std::variant<AddState, SubtractState, ArcModification, Composition>;

struct ApplyReceipt {
  MachineId target = kNoMachine;  // machine to mark (new root for compositions)
  bool composition = false;
  NodeId added_state = kNoNode;  // AddState only
};

// Every machine of h (Convention: a freshly initialised hierarchy is fully
// marked, so the same recomputation entry point serves first builds and
// updates alike).
MarkSet init_marks(const Hierarchy& h);

// Structural change only; marking is a separate step. Grafted payloads carry
// their pre-existing marks and exit entries into h's containers, and removed
// machines drop out of them, which is why both ride along.
ApplyReceipt apply(Hierarchy& h, MarkSet& marks, ExitTable& table, Modification m);

// Marks the modified machine and, except for compositions, all its ancestors.
void mark(const Hierarchy& h, MarkSet& marks, ExitTable& table, const ApplyReceipt& receipt);

ApplyReceipt apply_and_mark(Hierarchy& h, MarkSet& marks, ExitTable& table, Modification m);

// The marked machines must always form a root-containing subtree (or be
// empty); every recomputation pass relies on it.
bool marks_form_root_subtree(const Hierarchy& h, const MarkSet& marks);

}  // namespace himm
