// Command-line front end: solve, sweep, simulate, verify and extend.
//
// Exit codes: 0 success / converged, 1 malformed input or options,
// 2 iteration cap reached, 3 divergence guard tripped, 4 verification failures.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "bamle/dp_solver.hpp"
#include "bamle/extension_ops.hpp"
#include "bamle/game_sim.hpp"
#include "bamle/io.hpp"
#include "bamle/presets.hpp"
#include "bamle/verify_suite.hpp"

namespace fs = std::filesystem;
using namespace bamle;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { ok = 0, bad_input = 1, capped = 2, diverged = 3, checks_failed = 4 };

struct Options {
  std::string input;
  std::string preset;
  std::string output_dir = "out";
  std::optional<double> beta;
  std::optional<double> epsilon;
  double tolerance = 1e-12;
  std::size_t max_iters = 10'000'000;
  std::string init = "lambda";
  std::string sweep_kind = "jacobi";
  std::uint64_t seed = 1;
  std::string format = "both";
  PresetOptions preset_opts;
  std::optional<double> L;

  // per-command
  std::string axis = "beta";
  std::vector<double> values;
  std::string start;
  std::string strat_I = "greedy";
  std::string strat_II = "greedy";
  std::size_t episodes = 100'000;
  std::size_t max_steps = 1'000'000;
  std::string pull_target;
  std::string field;
  std::size_t cones = 100;
  std::string which = "psi";
};

unsigned env_threads() {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* s = std::getenv("BAMLE_THREADS")) {
    try {
      const long v = std::stol(s);
      if (v >= 1) return static_cast<unsigned>(std::min<long>(v, 256));
    } catch (...) {
    }
    throw InputError("BAMLE_THREADS must be a positive integer", "environment");
  }
  return hw;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--input", o.input, "Graph or grid JSON file");
  cmd->add_option("--preset", o.preset, "Built-in problem")
      ->check(CLI::IsMember(preset_names()));
  cmd->add_option("--output-dir", o.output_dir, "Directory for artifacts")->capture_default_str();
  cmd->add_option("--beta", o.beta, "Bias rate (0 = fair coin)");
  cmd->add_option("--epsilon", o.epsilon, "Step: edge length or grid spacing");
  cmd->add_option("--tolerance", o.tolerance, "Sup-norm stopping threshold")->capture_default_str();
  cmd->add_option("--max-iters", o.max_iters, "Sweep limit")->capture_default_str();
  cmd->add_option("--init", o.init, "lambda | psi | const:<v>")->capture_default_str();
  cmd->add_option("--sweep-kind", o.sweep_kind, "jacobi | gauss-seidel")
      ->check(CLI::IsMember({"jacobi", "gauss-seidel"}));
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--format", o.format, "json | csv | both")
      ->check(CLI::IsMember({"json", "csv", "both"}))
      ->capture_default_str();
  cmd->add_option("--A", o.preset_opts.A, "Cone slope (cone presets)");
  cmd->add_option("--a", o.preset_opts.a, "Ray family parameter");
  cmd->add_option("--N", o.preset_opts.N, "Path or ray length");
  cmd->add_option("--n", o.preset_opts.n, "Grid intervals per axis (square-2d)");
  cmd->add_option("--lo", o.preset_opts.lo, "Left payoff (path presets)");
  cmd->add_option("--hi", o.preset_opts.hi, "Right payoff (path-1d)");
  cmd->add_option("--p", o.preset_opts.p, "Left payoff (three-node)");
  cmd->add_option("--q", o.preset_opts.q, "Right payoff (three-node)");
  cmd->add_option("--c", o.preset_opts.c, "Constant boundary value");
  cmd->add_option("--boundary", o.preset_opts.boundary, "Boundary data for square-2d")
      ->check(CLI::IsMember(boundary_names()));
  cmd->add_option("--L", o.L, "Slope used by extensions (default: slope of g)");
}

Problem load(const Options& o) {
  if (o.input.empty() == o.preset.empty()) throw InputError("give exactly one of --input or --preset", "options");
  Problem p;
  if (!o.preset.empty()) {
    PresetOptions po = o.preset_opts;
    po.beta = o.beta;
    po.epsilon = o.epsilon;
    try {
      p = make_preset(o.preset, po);
    } catch (const std::invalid_argument& e) {
      throw InputError(e.what(), "--preset " + o.preset);
    }
    return p;
  }
  p = load_problem(o.input);
  if (o.epsilon && *o.epsilon != p.epsilon) {
    if (!p.rescale) throw InputError("this input cannot be rebuilt at another epsilon", "--epsilon");
    p = p.rescale(*o.epsilon);
  }
  if (o.beta) p.beta = *o.beta;
  return p;
}

SolveConfig solve_config(const Options& o) {
  SolveConfig c;
  c.tolerance = o.tolerance;
  c.max_iterations = o.max_iters;
  c.sweep = o.sweep_kind == "gauss-seidel" ? SweepKind::gauss_seidel : SweepKind::jacobi;
  c.threads = env_threads();
  if (o.init == "lambda") c.init = InitKind::from_lambda;
  else if (o.init == "psi") c.init = InitKind::from_psi;
  else if (o.init.rfind("const:", 0) == 0) {
    c.init = InitKind::constant;
    try {
      c.constant_init = std::stod(o.init.substr(6));
    } catch (...) {
      throw InputError("bad constant in --init", "--init " + o.init);
    }
  } else {
    throw InputError("--init must be lambda, psi or const:<v>", "--init " + o.init);
  }
  return c;
}

bool want_json(const Options& o) { return o.format != "csv"; }
bool want_csv(const Options& o) { return o.format != "json"; }

class Run {
 public:
  Run(std::string command, const Options& o) : command_(std::move(command)), o_(o) {
    t0_ = std::chrono::steady_clock::now();
    fs::create_directories(o.output_dir);
  }

  void emit(const std::string& name, const std::string& text) {
    const auto path = (fs::path(o_.output_dir) / name).string();
    write_text(path, text);
    outputs_.push_back(name);
  }

  void finish(const Problem& p, const ojson& extra = ojson::object()) {
    ojson m;
    m["command"] = command_;
    m["tool_version"] = kVersion;
    m["inputs"] = ojson::array({o_.preset.empty() ? o_.input : "preset:" + o_.preset});
    m["problem"] = p.name;
    m["beta"] = p.beta;
    m["epsilon"] = p.epsilon;
    m["rho"] = p.bias().rho;
    ojson cfg;
    cfg["tolerance"] = o_.tolerance;
    cfg["max_iterations"] = o_.max_iters;
    cfg["init"] = o_.init;
    cfg["sweep"] = o_.sweep_kind;
    cfg["format"] = o_.format;
    m["config"] = cfg;
    m["seed"] = o_.seed;
    m["threads"] = env_threads();
    m["outputs"] = outputs_;
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    m["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    write_text((fs::path(o_.output_dir) / "manifest.json").string(), m.dump(2) + "\n");
  }

 private:
  std::string command_;
  const Options& o_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point t0_;
};

int exit_for(const ValueField& f) {
  switch (f.status) {
    case SolveStatus::converged: return ok;
    case SolveStatus::iteration_cap: return capped;
    default: return diverged;
  }
}

void emit_field(Run& run, const Options& o, const ValueField& f, const Problem& p) {
  if (want_json(o)) run.emit("field.json", field_json(f, p.space()));
  if (want_csv(o)) run.emit("field.csv", field_csv(f.values, p));
}

int cmd_solve(const Options& o) {
  Problem p = load(o);
  Run run("solve", o);
  auto f = solve(p.space(), p.bias(), solve_config(o));
  emit_field(run, o, f, p);
  ojson extra;
  extra["status"] = to_string(f.status);
  extra["iterations"] = f.iterations;
  run.finish(p, extra);
  std::cout << "status " << to_string(f.status) << ", " << f.iterations << " sweeps, residual "
            << format_number(f.residual) << "\n";
  if (!f.diagnostic.empty()) std::cerr << f.diagnostic << "\n";
  return exit_for(f);
}

int cmd_sweep(const Options& o) {
  if (o.values.empty()) throw InputError("--values is required", "--values");
  const bool up = std::is_sorted(o.values.begin(), o.values.end());
  const bool down = std::is_sorted(o.values.rbegin(), o.values.rend());
  if (!up && !down) throw InputError("sweep values must be sorted", "--values");
  Problem base = load(o);
  if (o.axis == "epsilon" && !base.rescale)
    throw InputError("this input cannot be rebuilt at another epsilon", "--axis epsilon");
  Run run("sweep", o);
  const auto cfg = solve_config(o);
  std::ostringstream rows;
  std::ostringstream summary;
  rows << "# manifest: manifest.json\nparam,node,value\n";
  summary << "# manifest: manifest.json\nparam,status,iterations,residual,"
          << (o.axis == "beta" ? "max_drop_vs_prev" : "cauchy_gap") << "\n";
  int code = ok;
  std::optional<Problem> prev_problem;
  std::vector<double> prev;
  for (double v : o.values) {
    Problem p = o.axis == "beta" ? base : base.rescale(v);
    if (o.axis == "beta") p.beta = v;
    auto f = solve(p.space(), p.bias(), cfg);
    if (!f.ok()) code = std::max(code, exit_for(f));
    const auto& g = p.space();
    for (NodeId x = 0; x < g.size(); ++x)
      rows << format_number(v) << ",\"" << g.label(x) << "\"," << format_number(f.values[x]) << "\n";
    std::string cmp = "";
    if (prev_problem && f.ok()) {
      double worst = -kInfinity;
      const auto& pg = prev_problem->space();
      for (NodeId x = 0; x < pg.size(); ++x) {
        std::optional<NodeId> y;
        if (prev_problem->grid) y = p.grid->nearest(prev_problem->grid->coord(x));
        else y = g.find(pg.label(x));
        if (!y) continue;
        const double d = o.axis == "beta" ? (up ? prev[x] - f.values[*y] : f.values[*y] - prev[x])
                                          : std::abs(prev[x] - f.values[*y]);
        worst = std::max(worst, d);
      }
      cmp = format_number(worst);
    }
    summary << format_number(v) << ',' << to_string(f.status) << ',' << f.iterations << ','
            << format_number(f.residual) << ',' << cmp << "\n";
    if (f.ok()) {
      prev_problem = p;
      prev = f.values;
    }
  }
  run.emit("sweep.csv", rows.str());
  run.emit("sweep_summary.csv", summary.str());
  ojson extra;
  extra["axis"] = o.axis;
  extra["values"] = o.values;
  run.finish(base, extra);
  return code;
}

Strategy parse_strategy(const std::string& s, const BiasedGraph& g, const std::vector<double>* field) {
  auto node = [&](const std::string& label) {
    auto x = g.find(label);
    if (!x) throw InputError("unknown node '" + label + "' in strategy", s);
    return *x;
  };
  if (s == "greedy") return Strategy::greedy(*field);
  if (s == "random") return Strategy::uniform();
  if (s.rfind("toward:", 0) == 0) return Strategy::pull_toward(node(s.substr(7)));
  if (s.rfind("away:", 0) == 0) return Strategy::pull_away(node(s.substr(5)));
  throw InputError("strategy must be greedy, random, toward:<id> or away:<id>", s);
}

int cmd_simulate(const Options& o) {
  Problem p = load(o);
  const auto& g = p.space();
  Run run("simulate", o);
  auto f = solve(g, p.bias(), solve_config(o));
  if (!f.ok()) {
    std::cerr << "solve for greedy strategies failed: " << f.diagnostic << "\n";
    return exit_for(f);
  }
  NodeId start;
  if (o.start.empty()) {
    if (g.interior().empty()) throw InputError("no non-terminal node to start from", "--start");
    start = g.interior()[0];
  } else {
    auto s = g.find(o.start);
    if (!s) throw InputError("unknown start node '" + o.start + "'", "--start");
    start = *s;
  }
  if (g.is_terminal(start)) throw InputError("start node is terminal", "--start");
  PlayConfig pc;
  pc.n = o.episodes;
  pc.seed = o.seed;
  pc.max_steps = o.max_steps;
  pc.threads = env_threads();
  auto sI = parse_strategy(o.strat_I, g, &f.values);
  auto sII = parse_strategy(o.strat_II, g, &f.values);
  auto st = play(g, p.bias(), start, sI, sII, pc);
  if (want_json(o)) run.emit("stats.json", stats_json(st, g));
  if (want_csv(o)) run.emit("stats.csv", stats_csv({st}, g));
  ojson extra;
  extra["start"] = g.label(start);
  extra["strategy_I"] = o.strat_I;
  extra["strategy_II"] = o.strat_II;
  extra["dp_value"] = f.values[start];
  if (!o.pull_target.empty()) {
    auto y = g.find(o.pull_target);
    if (!y) throw InputError("unknown pull target '" + o.pull_target + "'", "--pull-bounds");
    const double L = o.L.value_or(boundary_slope(g, p.beta));
    auto rep = check_pull_bounds(g, p.bias(), start, *y, L, pc, &f.values);
    ojson b;
    b["target"] = o.pull_target;
    b["distance"] = rep.distance;
    b["L"] = rep.L;
    b["lower_bound"] = rep.lower_bound;
    b["toward_mean"] = rep.toward.mean_payoff;
    b["toward_se"] = rep.toward.std_error;
    b["lower_holds"] = rep.lower_holds;
    b["upper_bound"] = rep.upper_bound;
    b["away_mean"] = rep.away.mean_payoff;
    b["away_se"] = rep.away.std_error;
    b["away_term_rate"] = rep.away.termination_rate;
    b["upper_holds"] = rep.upper_holds;
    b["manifest"] = "manifest.json";
    run.emit("bounds.json", b.dump(2) + "\n");
  }
  run.finish(p, extra);
  std::cout << "mean " << format_number(st.mean_payoff) << " +- " << format_number(st.std_error)
            << " (dp value " << format_number(f.values[start]) << ", termination rate "
            << st.termination_rate << ")\n";
  return ok;
}

int cmd_verify(const Options& o) {
  Problem p = load(o);
  Run run("verify", o);
  std::vector<double> u;
  if (!o.field.empty()) {
    u = load_field(o.field, p.space());
  } else {
    auto f = solve(p.space(), p.bias(), solve_config(o));
    if (!f.ok()) {
      std::cerr << "solve failed: " << f.diagnostic << "\n";
      return exit_for(f);
    }
    u = std::move(f.values);
  }
  VerifyConfig vc;
  vc.seed = o.seed;
  vc.cone_samples = o.cones;
  vc.solve_tolerance = o.tolerance;
  auto results = run_all(u, p.space(), p.bias(), vc, p.grid.get());
  const auto table = report_table(results);
  if (want_json(o)) run.emit("report.json", report_json(results, p.space()));
  run.emit("report.txt", table);
  ojson extra;
  extra["all_passed"] = all_passed(results);
  run.finish(p, extra);
  std::cout << table;
  return all_passed(results) ? ok : checks_failed;
}

int cmd_extend(const Options& o) {
  Problem p = load(o);
  Run run("extend", o);
  const double L = o.L.value_or(boundary_slope(p.space(), p.beta));
  auto ext = o.which == "psi" ? psi_field(p.space(), L, p.beta) : lambda_field(p.space(), L, p.beta);
  if (ext.slope_deficit) std::cerr << "warning: L is below the slope of the boundary data\n";
  ValueField f;
  f.values = ext.values;
  emit_field(run, o, f, p);
  ojson extra;
  extra["which"] = o.which;
  extra["L"] = L;
  extra["slope_deficit"] = ext.slope_deficit;
  run.finish(p, extra);
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Biased tug-of-war solver and exponential-extension toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto* solve_cmd = app.add_subcommand("solve", "Compute game values");
  add_common(solve_cmd, o);

  auto* sweep_cmd = app.add_subcommand("sweep", "Solve over a list of beta or epsilon values");
  add_common(sweep_cmd, o);
  sweep_cmd->add_option("--axis", o.axis, "beta | epsilon")->check(CLI::IsMember({"beta", "epsilon"}));
  sweep_cmd->add_option("--values", o.values, "Parameter values")->delimiter(',')->required();

  auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo play");
  add_common(sim_cmd, o);
  sim_cmd->add_option("--start", o.start, "Start node id");
  sim_cmd->add_option("--strat-I", o.strat_I, "greedy | random | toward:<id> | away:<id>");
  sim_cmd->add_option("--strat-II", o.strat_II, "greedy | random | toward:<id> | away:<id>");
  sim_cmd->add_option("--episodes", o.episodes, "Number of episodes")->capture_default_str();
  sim_cmd->add_option("--max-steps", o.max_steps, "Per-episode step cap")->capture_default_str();
  sim_cmd->add_option("--pull-bounds", o.pull_target, "Terminal for the pull-strategy bound check");

  auto* verify_cmd = app.add_subcommand("verify", "Run the property checks");
  add_common(verify_cmd, o);
  verify_cmd->add_option("--field", o.field, "Field JSON to check (default: solve first)");
  verify_cmd->add_option("--cones", o.cones, "Sampled cones per sweep")->capture_default_str();

  auto* extend_cmd = app.add_subcommand("extend", "Exponential McShane-Whitney extension");
  add_common(extend_cmd, o);
  extend_cmd->add_option("--which", o.which, "psi | lambda")->check(CLI::IsMember({"psi", "lambda"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : bad_input;
  }

  try {
    if (*solve_cmd) return cmd_solve(o);
    if (*sweep_cmd) return cmd_sweep(o);
    if (*sim_cmd) return cmd_simulate(o);
    if (*verify_cmd) return cmd_verify(o);
    if (*extend_cmd) return cmd_extend(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bad_input;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return bad_input;
  }
  return ok;
}
