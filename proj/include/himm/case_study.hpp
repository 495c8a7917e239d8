// The robot-lab benchmark model: a three-layer hierarchy of houses in a line,
// per-house location grids, and per-location lab desks, plus the three bench
// studies run over it.
#pragma once

#include <string>
#include <vector>

#include "himm/core.hpp"
#include "himm/modifications.hpp"

namespace himm {

// Everything that fixes the model beyond its published shape lives here, so
// the study plans and their golden costs are deterministic.
struct StudyDefinition {
  int houses = 10;          // in a line, moves cost 100
  int grid = 10;            // per-house location grid, moves cost 1
  int rack = 3;             // desk tube rack, arm moves cost 0.5
  Cost house_cost = 100;
  Cost grid_cost = 1;
  Cost desk_cost = 0.5;
  Cost scan_cost = 10;
  // The entrance state adjoins the grid below its bottom-left cell:
  // ent --up--> (grid-1, 0), and that cell's "down" returns to the entrance.
  // Left/right at the entrance are undefined and so bubble to the house level.
  //
  // Study 3 blocks a wall of cells in House 2: column 5 at rows 3..9, leaving
  // a gap at rows 0..2 that forces a detour.
  std::vector<std::pair<int, int>> study3_blocked{{3, 5}, {4, 5}, {5, 5}, {6, 5},
                                                  {7, 5}, {8, 5}, {9, 5}};
  // All studies start at the bottom-right desk of House 1 with the arm over
  // tube (2,2); the goal is to have scanned tube (2,2) at the bottom-right
  // desk of House 10 / 11 / 2 for studies 1 / 2 / 3.
  std::string start = "h1.g9.9.a22";
  std::string goal(int study) const {
    return study == 1 ? "h10.g9.9.a22s22" : study == 2 ? "h11.g9.9.a22s22" : "h2.g9.9.a22s22";
  }
};

const StudyDefinition& study_definition();
const std::vector<std::string>& case_study_alphabet();

Hierarchy build_case_study();
// Standalone house hierarchy (location grid with its desks), used by
// Study 2's state addition.
Hierarchy build_house(int house_number);

// Applies the modifications of study 2 (add House 11, connect it to House 10)
// or study 3 (block cells in House 2). Study 1 applies nothing.
void apply_study_modifications(Hierarchy& h, MarkSet& marks, ExitTable& table, int study);

struct BenchOptions {
  int repeat = 5;        // median of this many runs per phase
  int heavy_repeat = 1;  // applies to CH preprocessing
  bool with_ch = true;
};

struct StudyReport {
  int study = 0;
  std::size_t machines = 0;
  std::size_t flat_states = 0;
  int machines_recomputed = 0;
  double exits_incremental_s = 0;
  double exits_full_s = 0;
  double hier_query_s = 0;
  double dijkstra_query_s = 0;
  double ch_preprocess_s = 0;
  double ch_query_s = 0;
  Cost hier_cost = kInfiniteCost;
  Cost dijkstra_cost = kInfiniteCost;
  Cost ch_cost = kInfiniteCost;
  std::size_t hier_len = 0;
  std::size_t dijkstra_len = 0;
  std::size_t ch_len = 0;
  bool with_ch = false;
  bool costs_agree = false;
};

StudyReport run_study(int study, const BenchOptions& opts);

// CSV schema v1: study,method,phase,seconds,plan_cost,plan_len,machines_recomputed
extern const char* const kBenchCsvVersion;
std::string bench_csv_header();
std::vector<std::string> bench_csv_rows(const StudyReport& r);
std::string bench_table(const StudyReport& r);

}  // namespace himm
