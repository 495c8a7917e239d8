#include "himm/case_study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "himm/baselines.hpp"
#include "himm/exit_computer.hpp"
#include "himm/planner.hpp"

namespace himm {

namespace {

enum : Input { kUp, kDown, kLeft, kRight, kArmUp, kArmDown, kArmLeft, kArmRight, kScan, kWork, kBack };

std::string cell_name(int house, int r, int c) {
  return "h" + std::to_string(house) + ".g" + std::to_string(r) + "." + std::to_string(c);
}

std::string arm_name(const std::string& loc, int i, int j, int sp = 0, int sq = 0) {
  std::string n = loc + ".a" + std::to_string(i) + std::to_string(j);
  if (sp > 0) n += "s" + std::to_string(sp) + std::to_string(sq);
  return n;
}

// Desk machine under one location: start state S, a 3x3 arm grid, and one
// remembered-scan copy of the arm grid per tube. Scanning is possible only
// before any tube was scanned, and returning to S only with the arm at (1,1).
void populate_desk(Hierarchy& h, MachineId desk, const std::string& loc) {
  const StudyDefinition& def = study_definition();
  const int rack = def.rack;
  NodeId s = h.add_state(desk, loc + ".S");
  h.set_start(desk, s);
  auto arm = [&](int i, int j, int sp, int sq) {
    return *h.find_node(arm_name(loc, i, j, sp, sq));
  };
  for (int i = 1; i <= rack; ++i)
    for (int j = 1; j <= rack; ++j) h.add_state(desk, arm_name(loc, i, j));
  for (int sp = 1; sp <= rack; ++sp)
    for (int sq = 1; sq <= rack; ++sq)
      for (int i = 1; i <= rack; ++i)
        for (int j = 1; j <= rack; ++j) h.add_state(desk, arm_name(loc, i, j, sp, sq));

  h.set_transition(desk, s, kWork, arm(1, 1, 0, 0), def.desk_cost);
  auto arm_moves = [&](int sp, int sq) {
    for (int i = 1; i <= rack; ++i) {
      for (int j = 1; j <= rack; ++j) {
        NodeId at = arm(i, j, sp, sq);
        if (i > 1) h.set_transition(desk, at, kArmUp, arm(i - 1, j, sp, sq), def.desk_cost);
        if (i < rack) h.set_transition(desk, at, kArmDown, arm(i + 1, j, sp, sq), def.desk_cost);
        if (j > 1) h.set_transition(desk, at, kArmLeft, arm(i, j - 1, sp, sq), def.desk_cost);
        if (j < rack) h.set_transition(desk, at, kArmRight, arm(i, j + 1, sp, sq), def.desk_cost);
        if (sp == 0) h.set_transition(desk, at, kScan, arm(i, j, i, j), def.scan_cost);
      }
    }
    h.set_transition(desk, arm(1, 1, sp, sq), kBack, s, def.desk_cost);
  };
  arm_moves(0, 0);
  for (int sp = 1; sp <= rack; ++sp)
    for (int sq = 1; sq <= rack; ++sq) arm_moves(sp, sq);
}

// Location grid of one house; every location state (entrance included)
// refines into a desk machine.
void populate_house_map(Hierarchy& h, MachineId map, int house) {
  const StudyDefinition& def = study_definition();
  const int grid = def.grid;
  const std::string prefix = "h" + std::to_string(house);
  NodeId ent = h.add_state(map, prefix + ".ent");
  h.set_start(map, ent);
  for (int r = 0; r < grid; ++r)
    for (int c = 0; c < grid; ++c) h.add_state(map, cell_name(house, r, c));
  auto cell = [&](int r, int c) { return *h.find_node(cell_name(house, r, c)); };
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) {
      NodeId at = cell(r, c);
      if (r > 0) h.set_transition(map, at, kUp, cell(r - 1, c), def.grid_cost);
      if (r < grid - 1) h.set_transition(map, at, kDown, cell(r + 1, c), def.grid_cost);
      if (c > 0) h.set_transition(map, at, kLeft, cell(r, c - 1), def.grid_cost);
      if (c < grid - 1) h.set_transition(map, at, kRight, cell(r, c + 1), def.grid_cost);
    }
  }
  h.set_transition(map, ent, kUp, cell(grid - 1, 0), def.grid_cost);
  h.set_transition(map, cell(grid - 1, 0), kDown, ent, def.grid_cost);

  populate_desk(h, h.add_child_machine(ent, prefix + ".ent.desk"), prefix + ".ent");
  for (int r = 0; r < grid; ++r)
    for (int c = 0; c < grid; ++c)
      populate_desk(h, h.add_child_machine(cell(r, c), cell_name(house, r, c) + ".desk"),
                    cell_name(house, r, c));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median_time(int runs, const std::function<double()>& timed_run) {
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(runs));
  for (int i = 0; i < runs; ++i) times.push_back(timed_run());
  std::sort(times.begin(), times.end());
  return times[static_cast<std::size_t>((times.size() - 1) / 2)];
}

std::string format_cost(Cost c) {
  if (is_infinite(c)) return "inf";
  std::ostringstream out;
  out.precision(12);
  out << c;
  return out.str();
}

}  // namespace

const StudyDefinition& study_definition() {
  static const StudyDefinition def;
  return def;
}

const std::vector<std::string>& case_study_alphabet() {
  static const std::vector<std::string> alphabet{"up",       "down",     "left",  "right",
                                                 "arm_up",   "arm_down", "arm_left", "arm_right",
                                                 "scan",     "work",     "back"};
  return alphabet;
}

Hierarchy build_case_study() {
  const StudyDefinition& def = study_definition();
  Hierarchy h(case_study_alphabet());
  MachineId root = h.add_root_machine("houses");
  for (int k = 1; k <= def.houses; ++k) h.add_state(root, "h" + std::to_string(k));
  auto house = [&](int k) { return *h.find_node("h" + std::to_string(k)); };
  h.set_start(root, house(1));
  for (int k = 1; k <= def.houses; ++k) {
    if (k > 1) h.set_transition(root, house(k), kLeft, house(k - 1), def.house_cost);
    if (k < def.houses) h.set_transition(root, house(k), kRight, house(k + 1), def.house_cost);
  }
  for (int k = 1; k <= def.houses; ++k)
    populate_house_map(h, h.add_child_machine(house(k), "h" + std::to_string(k) + ".map"), k);
  return h;
}

Hierarchy build_house(int house_number) {
  Hierarchy h(case_study_alphabet());
  MachineId map = h.add_root_machine("h" + std::to_string(house_number) + ".map");
  populate_house_map(h, map, house_number);
  return h;
}

void apply_study_modifications(Hierarchy& h, MarkSet& marks, ExitTable& table, int study) {
  const StudyDefinition& def = study_definition();
  if (study == 1) return;
  if (study == 2) {
    MachineId root = h.root();
    apply_and_mark(h, marks, table,
                   AddState{root, "h11", SubHierarchy::fresh(build_house(def.houses + 1))});
    std::vector<Hierarchy::Arc> arcs = machine_arcs(h, root);
    NodeId h10 = *h.find_node("h10");
    NodeId h11 = *h.find_node("h11");
    arcs.push_back({h10, kRight, h11, def.house_cost});
    arcs.push_back({h11, kLeft, h10, def.house_cost});
    apply_and_mark(h, marks, table, ArcModification{root, arcs, h.machine(root).start_state()});
    return;
  }
  if (study == 3) {
    MachineId map = *h.find_machine("h2.map");
    for (auto [r, c] : def.study3_blocked)
      apply_and_mark(h, marks, table, SubtractState{map, *h.find_node(cell_name(2, r, c))});
    return;
  }
  throw std::invalid_argument("study must be 1, 2 or 3");
}

StudyReport run_study(int study, const BenchOptions& opts) {
  const StudyDefinition& def = study_definition();
  StudyReport r;
  r.study = study;
  r.with_ch = opts.with_ch;

  Hierarchy h = build_case_study();
  MarkSet marks = init_marks(h);
  ExitTable table;

  if (study == 1) {
    r.exits_incremental_s = median_time(opts.repeat, [&] {
      MarkSet mc = marks;
      ExitTable tc = table;
      auto t0 = std::chrono::steady_clock::now();
      r.machines_recomputed = compute_optimal_exits(h, mc, tc);
      return seconds_since(t0);
    });
    compute_optimal_exits(h, marks, table);
  } else {
    compute_optimal_exits(h, marks, table);
    apply_study_modifications(h, marks, table, study);
    r.exits_incremental_s = median_time(opts.repeat, [&] {
      MarkSet mc = marks;
      ExitTable tc = table;
      auto t0 = std::chrono::steady_clock::now();
      r.machines_recomputed = compute_optimal_exits(h, mc, tc);
      return seconds_since(t0);
    });
    compute_optimal_exits(h, marks, table);
  }
  r.machines = h.machine_count();
  r.flat_states = h.flat_state_count();

  r.exits_full_s = median_time(opts.repeat, [&] {
    MarkSet mc = init_marks(h);
    ExitTable tc;
    auto t0 = std::chrono::steady_clock::now();
    compute_optimal_exits(h, mc, tc);
    return seconds_since(t0);
  });

  NodeId from = *h.find_node(def.start);
  NodeId to = *h.find_node(def.goal(study));

  std::optional<Plan> best;
  r.hier_query_s = median_time(opts.repeat, [&] {
    auto t0 = std::chrono::steady_clock::now();
    best = plan(h, table, marks, from, to);
    return seconds_since(t0);
  });
  if (!best) throw std::logic_error("case study goal is unreachable");
  r.hier_cost = best->cost;
  r.hier_len = best->inputs.size();

  FlatGraph flat = flatten(h);
  SearchResult dj;
  r.dijkstra_query_s = median_time(opts.repeat, [&] {
    auto t0 = std::chrono::steady_clock::now();
    dj = dijkstra_flat(flat, from, to);
    return seconds_since(t0);
  });
  r.dijkstra_cost = dj.cost;
  r.dijkstra_len = dj.plan.size();

  if (opts.with_ch) {
    CHIndex idx;
    r.ch_preprocess_s = median_time(opts.heavy_repeat, [&] {
      auto t0 = std::chrono::steady_clock::now();
      idx = ch_preprocess(flat);
      return seconds_since(t0);
    });
    SearchResult cq;
    r.ch_query_s = median_time(opts.repeat, [&] {
      auto t0 = std::chrono::steady_clock::now();
      cq = ch_query(idx, from, to);
      return seconds_since(t0);
    });
    r.ch_cost = cq.cost;
    r.ch_len = cq.plan.size();
  }

  r.costs_agree = std::abs(r.hier_cost - r.dijkstra_cost) <= 1e-9 &&
                  (!opts.with_ch || std::abs(r.hier_cost - r.ch_cost) <= 1e-9);
  return r;
}

const char* const kBenchCsvVersion = "# himm-bench-csv-1";

std::string bench_csv_header() {
  return "study,method,phase,seconds,plan_cost,plan_len,machines_recomputed";
}

std::vector<std::string> bench_csv_rows(const StudyReport& r) {
  auto row = [&](const std::string& method, const std::string& phase, double seconds,
                 const std::string& cost, const std::string& len, const std::string& recomputed) {
    std::ostringstream out;
    out << r.study << ',' << method << ',' << phase << ',';
    out.precision(6);
    out << seconds << ',' << cost << ',' << len << ',' << recomputed;
    return out.str();
  };
  std::vector<std::string> rows;
  rows.push_back(row("hier", "exits_incremental", r.exits_incremental_s, "", "",
                     std::to_string(r.machines_recomputed)));
  rows.push_back(row("hier", "exits_full", r.exits_full_s, "", "", std::to_string(r.machines)));
  rows.push_back(row("hier", "query", r.hier_query_s, format_cost(r.hier_cost),
                     std::to_string(r.hier_len), ""));
  rows.push_back(row("dijkstra", "query", r.dijkstra_query_s, format_cost(r.dijkstra_cost),
                     std::to_string(r.dijkstra_len), ""));
  if (r.with_ch) {
    rows.push_back(row("ch", "preprocess", r.ch_preprocess_s, "", "", ""));
    rows.push_back(
        row("ch", "query", r.ch_query_s, format_cost(r.ch_cost), std::to_string(r.ch_len), ""));
  }
  return rows;
}

std::string bench_table(const StudyReport& r) {
  std::ostringstream out;
  out.precision(6);
  out << "study " << r.study << " (" << r.machines << " machines, " << r.flat_states
      << " flat states)\n";
  out << "  exit costs, incremental   " << r.exits_incremental_s << " s  ("
      << r.machines_recomputed << " machines recomputed)\n";
  out << "  exit costs, full          " << r.exits_full_s << " s\n";
  out << "  plan query, hierarchical  " << r.hier_query_s << " s  (cost "
      << format_cost(r.hier_cost) << ", " << r.hier_len << " inputs)\n";
  out << "  plan query, dijkstra      " << r.dijkstra_query_s << " s  (cost "
      << format_cost(r.dijkstra_cost) << ", " << r.dijkstra_len << " inputs)\n";
  if (r.with_ch) {
    out << "  ch preprocessing          " << r.ch_preprocess_s << " s\n";
    out << "  plan query, ch            " << r.ch_query_s << " s  (cost " << format_cost(r.ch_cost)
        << ", " << r.ch_len << " inputs)\n";
  }
  out << "  methods agree: " << (r.costs_agree ? "yes" : "NO") << "\n";
  return out.str();
}

}  // namespace himm
