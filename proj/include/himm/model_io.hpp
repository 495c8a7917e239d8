// Model and modification-script file formats (JSON documents). Unknown keys
// are rejected everywhere; costs must be finite nonnegative numbers.
#pragma once

#include <stdexcept>
#include <string>

#include "himm/core.hpp"
#include "himm/modifications.hpp"

namespace himm {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable file or text that is not valid JSON (as opposed to a JSON
// document that violates the model schema).
struct ModelParseError : ModelError {
  using ModelError::ModelError;
};

// Model document: {"alphabet": [names], "machines": [{id, states, start,
// transitions: [{from, input, to, cost}]}], "tree": [{machine,
// parent_machine, parent_state}]}. Exactly one machine stays out of "tree"
// and becomes the root.
Hierarchy load_model(const std::string& text);
Hierarchy load_model_file(const std::string& path);

// Canonical serialization: machines in tree order (children in parent-state
// order), states in machine order, transitions sorted by (state, input).
// Equal output means equal hierarchies up to node-id renaming.
std::string save_model(const Hierarchy& h);
void save_model_file(const Hierarchy& h, const std::string& path);

// Modification script: an ordered JSON array of records {"op": "add_state" |
// "subtract_state" | "arc_modification" | "composition", ...}. Names are
// resolved against the hierarchy as it evolves, record by record, and every
// record is applied and marked before the next one is read. Returns the
// number of records applied.
std::size_t apply_script(Hierarchy& h, MarkSet& marks, ExitTable& table, const std::string& text);
std::size_t apply_script_file(Hierarchy& h, MarkSet& marks, ExitTable& table,
                              const std::string& path);

}  // namespace himm
