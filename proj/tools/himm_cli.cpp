// Command-line front end: validate models, plan between states with any of
// the three methods, apply modification scripts, run the bench studies, and
// cross-check the planners against each other.
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "himm/baselines.hpp"
#include "himm/case_study.hpp"
#include "himm/core.hpp"
#include "himm/exit_computer.hpp"
#include "himm/model_io.hpp"
#include "himm/modifications.hpp"
#include "himm/planner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // validation failure, disagreement, stale tables
constexpr int kExitBadInput = 2; // I/O or parse errors

std::string format_cost(himm::Cost c) {
  if (himm::is_infinite(c)) return "inf";
  std::ostringstream out;
  out.precision(12);
  out << c;
  return out.str();
}

std::string join_inputs(const himm::Hierarchy& h, const std::vector<himm::Input>& inputs) {
  std::string out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (i) out += ' ';
    out += h.alphabet()[static_cast<std::size_t>(inputs[i])];
  }
  return out;
}

himm::NodeId flat_state(const himm::Hierarchy& h, const std::string& name) {
  auto q = h.find_node(name);
  if (!q) throw himm::ModelError("unknown state \"" + name + "\"");
  if (!h.node(*q).flat()) throw himm::ModelError("state \"" + name + "\" is not a flat state");
  return *q;
}

void dump_exits(const himm::Hierarchy& h, const himm::ExitTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw himm::ModelError("cannot write " + path);
  for (himm::MachineId m : h.machine_ids()) {
    const himm::ExitEntry& entry = table.at(m);
    for (himm::Input x = 0; x < h.n_inputs(); ++x)
      out << h.machine(m).label << ' ' << h.alphabet()[static_cast<std::size_t>(x)] << ' '
          << format_cost(entry.costs[static_cast<std::size_t>(x)]) << '\n';
  }
}

void dump_flat(const himm::Hierarchy& h, const himm::FlatGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw himm::ModelError("cannot write " + path);
  for (std::size_t v = 0; v < g.vertices.size(); ++v)
    for (const himm::FlatGraph::Edge& e : g.adj[v])
      out << h.node(g.vertices[v]).name << ' ' << h.alphabet()[static_cast<std::size_t>(e.input)]
          << ' ' << h.node(g.vertices[static_cast<std::size_t>(e.to)]).name << ' '
          << format_cost(e.cost) << '\n';
}

struct PlanArgs {
  std::string model, from, to, method = "hier", script, dump_exits_path, dump_flat_path;
  bool stream = false;
  bool skip_recompute = false;
};

int cmd_validate(const std::string& model_path) {
  himm::Hierarchy h;
  try {
    h = himm::load_model_file(model_path);
  } catch (const himm::ModelParseError&) {
    throw;
  } catch (const himm::ModelError& e) {
    std::cout << "invalid: " << e.what() << "\n";
    return kExitFailure;
  }
  std::vector<himm::Violation> violations = himm::validate(h);
  if (violations.empty()) {
    std::cout << "ok: " << h.machine_count() << " machines, " << h.flat_state_count()
              << " flat states, depth " << himm::depth(h) << "\n";
    return kExitOk;
  }
  for (const himm::Violation& v : violations) std::cout << v.code << ": " << v.message << "\n";
  return kExitFailure;
}

int cmd_plan(const PlanArgs& args) {
  himm::Hierarchy h = himm::load_model_file(args.model);
  himm::MarkSet marks = himm::init_marks(h);
  himm::ExitTable table;
  if (!args.script.empty()) himm::apply_script_file(h, marks, table, args.script);
  himm::NodeId from = flat_state(h, args.from);
  himm::NodeId to = flat_state(h, args.to);

  himm::Cost cost = himm::kInfiniteCost;
  std::vector<himm::Input> inputs;
  bool found = false;
  if (args.method == "hier") {
    if (!args.skip_recompute) himm::compute_optimal_exits(h, marks, table);
    if (!args.dump_exits_path.empty()) dump_exits(h, table, args.dump_exits_path);
    auto p = himm::plan(h, table, marks, from, to);
    if (p) {
      found = true;
      cost = p->cost;
      if (args.stream) {
        himm::PlanCursor cursor(h, table, p->steps);
        while (auto x = cursor.next()) inputs.push_back(*x);
      } else {
        inputs = p->inputs;
      }
    }
  } else {
    himm::FlatGraph g = himm::flatten(h);
    if (!args.dump_flat_path.empty()) dump_flat(h, g, args.dump_flat_path);
    himm::SearchResult res = args.method == "dijkstra"
                                 ? himm::dijkstra_flat(g, from, to)
                                 : himm::ch_query(himm::ch_preprocess(g), from, to);
    if (!himm::is_infinite(res.cost)) {
      found = true;
      cost = res.cost;
      inputs = std::move(res.plan);
    }
  }
  if (!args.dump_flat_path.empty() && args.method == "hier")
    dump_flat(h, himm::flatten(h), args.dump_flat_path);

  if (!found) {
    std::cout << "no plan\ncost: inf\n";
    return kExitOk;
  }
  std::cout << "plan: " << join_inputs(h, inputs) << "\n";
  std::cout << "cost: " << format_cost(cost) << "\n";
  std::cout << "length: " << inputs.size() << "\n";
  return kExitOk;
}

int cmd_modify(const std::string& model_path, const std::string& script_path,
               const std::string& out_path) {
  himm::Hierarchy h = himm::load_model_file(model_path);
  himm::MarkSet marks = himm::init_marks(h);
  himm::ExitTable table;
  std::size_t n = himm::apply_script_file(h, marks, table, script_path);
  himm::save_model_file(h, out_path);
  std::cout << "applied " << n << " modification(s); wrote " << out_path << "\n";
  return kExitOk;
}

int cmd_bench(int study, const himm::BenchOptions& opts, const std::string& format) {
  himm::StudyReport r = himm::run_study(study, opts);
  if (format == "csv") {
    std::cout << himm::kBenchCsvVersion << "\n" << himm::bench_csv_header() << "\n";
    for (const std::string& row : himm::bench_csv_rows(r)) std::cout << row << "\n";
  } else {
    std::cout << himm::bench_table(r);
  }
  if (!r.costs_agree) {
    std::cerr << "error: planner costs disagree\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_compare(const std::string& model_path, const std::string& pairs_path,
                const std::string& script_path, bool skip_recompute) {
  himm::Hierarchy h = himm::load_model_file(model_path);
  himm::MarkSet marks = himm::init_marks(h);
  himm::ExitTable table;
  if (!script_path.empty()) himm::apply_script_file(h, marks, table, script_path);
  if (!skip_recompute) himm::compute_optimal_exits(h, marks, table);

  std::ifstream in(pairs_path);
  if (!in) throw himm::ModelError("cannot open " + pairs_path);
  std::vector<std::pair<himm::NodeId, himm::NodeId>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string from, to;
    if (!(row >> from) || from[0] == '#') continue;
    if (!(row >> to)) throw himm::ModelError("pairs file: expected \"from to\" per line");
    pairs.emplace_back(flat_state(h, from), flat_state(h, to));
  }

  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  himm::FlatGraph g = himm::flatten(h);
  double flatten_s = std::chrono::duration<double>(clock::now() - t0).count();
  t0 = clock::now();
  himm::CHIndex idx = himm::ch_preprocess(g);
  double ch_prep_s = std::chrono::duration<double>(clock::now() - t0).count();

  double hier_s = 0, dijkstra_s = 0, ch_s = 0;
  bool all_agree = true;
  for (auto [from, to] : pairs) {
    t0 = clock::now();
    auto p = himm::plan(h, table, marks, from, to);
    hier_s += std::chrono::duration<double>(clock::now() - t0).count();
    himm::Cost hier_cost = p ? p->cost : himm::kInfiniteCost;

    t0 = clock::now();
    himm::SearchResult dj = himm::dijkstra_flat(g, from, to);
    dijkstra_s += std::chrono::duration<double>(clock::now() - t0).count();

    t0 = clock::now();
    himm::SearchResult cq = himm::ch_query(idx, from, to);
    ch_s += std::chrono::duration<double>(clock::now() - t0).count();

    bool agree =
        (himm::is_infinite(hier_cost) && himm::is_infinite(dj.cost) && himm::is_infinite(cq.cost)) ||
        (std::abs(hier_cost - dj.cost) <= 1e-9 && std::abs(hier_cost - cq.cost) <= 1e-9);
    all_agree = all_agree && agree;
    std::cout << h.node(from).name << " -> " << h.node(to).name << ": hier "
              << format_cost(hier_cost) << ", dijkstra " << format_cost(dj.cost) << ", ch "
              << format_cost(cq.cost) << (agree ? "" : "  MISMATCH") << "\n";
  }
  std::cout.precision(6);
  std::cout << "timings over " << pairs.size() << " pair(s):\n"
            << "  flatten        " << flatten_s << " s\n"
            << "  ch preprocess  " << ch_prep_s << " s\n"
            << "  hier queries   " << hier_s << " s\n"
            << "  dijkstra       " << dijkstra_s << " s\n"
            << "  ch queries     " << ch_s << " s\n";
  if (!all_agree) {
    std::cerr << "error: planner costs disagree\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical Mealy machine planning toolkit"};
  app.require_subcommand(1);

  std::string model, from, to, script, out, pairs, format = "table";
  PlanArgs plan_args;
  int study = 1;
  himm::BenchOptions bench_opts;
  bool skip_ch = false, skip_recompute = false;

  CLI::App* validate = app.add_subcommand("validate", "check a model file");
  validate->add_option("model", model, "model file")->required();

  CLI::App* plan = app.add_subcommand("plan", "plan between two flat states");
  plan->add_option("model", plan_args.model, "model file")->required();
  plan->add_option("--from", plan_args.from, "source state name")->required();
  plan->add_option("--to", plan_args.to, "goal state name")->required();
  plan->add_option("--method", plan_args.method, "hier|dijkstra|ch")
      ->check(CLI::IsMember({"hier", "dijkstra", "ch"}));
  plan->add_flag("--stream", plan_args.stream, "emit inputs via the streaming cursor");
  plan->add_option("--script", plan_args.script, "apply a modification script first");
  plan->add_flag("--skip-recompute", plan_args.skip_recompute,
                 "debug: skip exit recomputation after --script");
  plan->add_option("--dump-exits", plan_args.dump_exits_path, "debug: write the exit-cost table");
  plan->add_option("--dump-flat", plan_args.dump_flat_path, "debug: write the flattened graph");

  CLI::App* modify = app.add_subcommand("modify", "apply a modification script");
  modify->add_option("model", model, "model file")->required();
  modify->add_option("--script", script, "modification script")->required();
  modify->add_option("--out", out, "output model file")->required();

  CLI::App* bench = app.add_subcommand("bench", "run a case study");
  bench->add_option("--study", study, "1, 2 or 3")->required()->check(CLI::Range(1, 3));
  bench->add_option("--repeat", bench_opts.repeat, "median of this many runs")
      ->check(CLI::PositiveNumber);
  bench->add_option("--heavy-repeat", bench_opts.heavy_repeat, "runs for CH preprocessing")
      ->check(CLI::PositiveNumber);
  bench->add_option("--format", format, "csv|table")->check(CLI::IsMember({"csv", "table"}));
  bench->add_flag("--skip-ch", skip_ch, "skip the contraction-hierarchies phases");

  CLI::App* compare = app.add_subcommand("compare", "run all three planners on state pairs");
  compare->add_option("model", model, "model file")->required();
  compare->add_option("--pairs", pairs, "file with one \"from to\" pair per line")->required();
  compare->add_option("--script", script, "apply a modification script first");
  compare->add_flag("--skip-recompute", skip_recompute,
                    "debug: skip exit recomputation after --script");

  try {
    app.parse(argc, argv);
    if (*validate) return cmd_validate(model);
    if (*plan) return cmd_plan(plan_args);
    if (*modify) return cmd_modify(model, script, out);
    if (*bench) {
      bench_opts.with_ch = !skip_ch;
      return cmd_bench(study, bench_opts, format);
    }
    if (*compare) return cmd_compare(model, pairs, script, skip_recompute);
    return kExitBadInput;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  } catch (const himm::StaleTableError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const himm::ModelParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const himm::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
}
