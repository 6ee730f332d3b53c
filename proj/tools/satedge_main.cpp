// satedge: command-line driver for the offloading optimizer.
//
// Exit codes: 0 ok, 2 usage, 3 infeasible, 4 solver failure, 5 bad config.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "satedge/orchestrator.hpp"

namespace fs = std::filesystem;
using namespace satedge;

namespace {

enum Exit { kOk = 0, kUsage = 2, kInfeasible = 3, kSolverFailure = 4, kConfig = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;  // 0: hardware concurrency
  std::vector<std::string> sets;
  double rho = AdmmSettings{}.rho;
  int max_iters = AdmmSettings{}.max_iters;
  int first_episodes = AdmmSettings{}.first_episodes;
  int warm_episodes = AdmmSettings{}.warm_episodes;
};

void add_common(CLI::App* cmd, Common& c, bool solver_flags) {
  cmd->add_option("--scenario", c.scenario, "Scenario document; generated from --seed when omitted");
  cmd->add_option("--seed", c.seed, "Scenario seed (when generated) and agent seed");
  cmd->add_option("--out", c.out, "Output directory (default: $SATEDGE_OUT_DIR, else ./out)");
  cmd->add_option("--threads", c.threads, "Worker threads; 0 = all cores, 1 = bit-reproducible")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--set", c.sets, "Scenario override key=value (generated scenarios only)");
  if (solver_flags) {
    cmd->add_option("--rho", c.rho, "Penalty parameter, J/MHz^2")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", c.max_iters, "ADMM iteration cap")->check(CLI::PositiveNumber);
    cmd->add_option("--first-episodes", c.first_episodes, "Agent episodes at the first x-update")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--warm-episodes", c.warm_episodes, "Agent episodes at later x-updates")
        ->check(CLI::NonNegativeNumber);
  }
}

fs::path out_dir(const Common& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("SATEDGE_OUT_DIR"); env && *env) return env;
  return "out";
}

int threads_of(const Common& c) {
  if (c.threads > 0) return c.threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

Scenario load(const Common& c) {
  if (!c.scenario.empty()) {
    if (!c.sets.empty()) throw UsageError("--set only applies to generated scenarios");
    return load_scenario(c.scenario);
  }
  Overrides o;
  for (const std::string& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
    o[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return generate_scenario(c.seed, o);
}

AdmmSettings settings_of(const Common& c) {
  AdmmSettings st;
  st.rho = c.rho;
  st.max_iters = c.max_iters;
  st.first_episodes = c.first_episodes;
  st.warm_episodes = c.warm_episodes;
  st.threads = threads_of(c);
  return st;
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const std::string& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

Method method_of(const std::string& name) {
  if (auto m = parse_method(name)) return *m;
  throw UsageError("unknown method '" + name + "'");
}

int cmd_generate(const Common& c) {
  const Scenario s = load(c);
  const fs::path path = out_dir(c) / ("scenario_" + std::to_string(s.seed) + ".json");
  fs::create_directories(path.parent_path());
  save_scenario(s, path);
  std::cout << path.string() << "\n";
  return kOk;
}

int cmd_solve(const Common& c, const std::string& method_name) {
  const Method m = method_of(method_name);
  const Scenario s = load(c);
  const AdmmSettings st = settings_of(c);
  const fs::path dir = out_dir(c);
  Outcome<Solution> r = solve(s, m, st, c.seed);
  const fs::path doc = dir / files::result(m);
  if (!r.ok()) {
    write_text(doc, infeasible_document(s, m, r.infeasibility(), st, c.seed));
    std::cerr << "infeasible (" << r.infeasibility().constraint << "): " << r.infeasibility().detail << "\n";
    return kInfeasible;
  }
  write_text(doc, result_document(s, *r, st, c.seed));
  const std::string iter_name = files::iterates(m);
  CsvMeta meta = CsvMeta::make("iterates", st, c.seed);
  meta.add("method", to_string(m));
  write_iterate_csv(dir / iter_name, r->log, meta);
  write_timing(dir / files::timing(files::result(m)), {{"solve_s", r->seconds}});
  std::printf("%s energy_j=%s assignment=%s converged=%d iterations=%zu\n", to_string(m).c_str(),
              format_double(r->energy).c_str(), r->x.to_string().c_str(), r->converged ? 1 : 0, r->log.size());
  return kOk;
}

int cmd_train(const Common& c, const std::string& agent, int episodes, bool grid) {
  AgentKind kind;
  if (agent == "hybrid") kind = AgentKind::Hybrid;
  else if (agent == "classical") kind = AgentKind::Classical;
  else throw UsageError("unknown agent '" + agent + "' (hybrid|classical)");
  const Scenario base = load(c);
  const AdmmSettings st = settings_of(c);
  const fs::path dir = out_dir(c);

  std::vector<std::pair<double, double>> pairs{{base.radio.b_access_total_hz, base.radio.b_s_total_hz}};
  if (grid) pairs = {{50e6, 100e6}, {50e6, 110e6}, {60e6, 100e6}, {60e6, 110e6}};
  for (const auto& [ba, bs] : pairs) {
    const Scenario s = with_axis(with_axis(base, SweepAxis::BAccessTotal, ba), SweepAxis::BSTotal, bs);
    const TrainingRun run = train_agent(s, kind, episodes, st, c.seed, dir / files::checkpoint(kind, ba, bs));
    const std::string name = files::curve(kind, ba, bs);
    CsvMeta meta = CsvMeta::make("curve", st, c.seed);
    meta.add("agent", agent);
    meta.add("b_access_total_hz", format_double(ba));
    meta.add("b_s_total_hz", format_double(bs));
    meta.add("best_possible_reward", format_double(run.best_possible));
    write_curve_csv(dir / name, run.result.curve, meta);
    write_timing(dir / files::timing(name), {{"train_s", run.seconds}});
    const double last = run.result.curve.empty() ? std::nan("") : run.result.curve.back().greedy_reward;
    std::printf("%s episodes=%d final_greedy_reward=%s best_possible=%s\n", name.c_str(), episodes,
                format_double(last).c_str(), format_double(run.best_possible).c_str());
  }
  return kOk;
}

int cmd_sweep(const Common& c, const std::string& axis_name, const std::vector<std::string>& value_args,
              const std::vector<std::string>& method_args) {
  const auto axis = parse_axis(axis_name);
  if (!axis) throw UsageError("unknown axis '" + axis_name + "' (task-bits|b-access-total|b-s-total)");
  std::vector<double> values;
  for (const std::string& v : split_list(value_args)) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw UsageError("bad sweep value '" + v + "'");
    }
  }
  if (values.empty()) throw UsageError("--values is empty");
  std::vector<Method> methods;
  for (const std::string& name : split_list(method_args)) methods.push_back(method_of(name));
  if (methods.empty()) throw UsageError("--method is empty");

  const Scenario base = load(c);
  const AdmmSettings st = settings_of(c);
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<SweepRow> rows = sweep(base, *axis, values, methods, st, c.seed, threads_of(c));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const fs::path dir = out_dir(c);
  const std::string name = files::sweep(*axis);
  write_sweep_csv(dir / name, *axis, rows, CsvMeta::make("sweep", st, c.seed));
  std::vector<std::pair<std::string, double>> timing{{"sweep_s", secs}};
  for (const SweepRow& r : rows) timing.emplace_back(to_string(r.method) + "@" + format_double(r.value), r.seconds);
  write_timing(dir / files::timing(name), timing);
  for (const SweepRow& r : rows)
    std::printf("%s=%s %s %s %s\n", to_string(*axis).c_str(), format_double(r.value).c_str(),
                to_string(r.method).c_str(), r.status.c_str(), format_double(r.energy).c_str());
  return kOk;
}

int cmd_duality_gap(const Common& c, const std::string& method_name) {
  const Method m = method_of(method_name);
  const Scenario s = load(c);
  const AdmmSettings st = settings_of(c);
  Outcome<GapReport> r = duality_gap_run(s, m, st, c.seed);
  if (!r.ok()) {
    std::cerr << "infeasible (" << r.infeasibility().constraint << "): " << r.infeasibility().detail << "\n";
    return kInfeasible;
  }
  const fs::path dir = out_dir(c);
  CsvMeta meta = CsvMeta::make("duality-gap", st, c.seed);
  meta.add("method", to_string(m));
  write_gap_csv(dir / files::kDualityGap, *r, meta);
  write_timing(dir / files::timing(files::kDualityGap), {{"solve_s", r->solution.seconds}});
  std::printf("primal=%s dual=%s relative_gap=%s\n", format_double(r->final_primal).c_str(),
              format_double(r->final_dual).c_str(), format_double(r->final_relative).c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satellite-terrestrial edge offloading optimizer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SATEDGE_VERSION);

  Common c;
  std::string method = "admm-hybrid";
  std::string agent = "hybrid";
  int episodes = 2000;
  bool grid = false;
  std::string axis;
  std::vector<std::string> values;
  std::vector<std::string> methods{"admm-exhaustive,equal-bandwidth"};

  auto* gen = app.add_subcommand("generate", "Write a scenario document");
  add_common(gen, c, false);

  auto* sol = app.add_subcommand("solve", "Solve one scenario");
  add_common(sol, c, true);
  sol->add_option("--method", method, "admm-hybrid|admm-classical|admm-exhaustive|exhaustive|equal-bandwidth");

  auto* tr = app.add_subcommand("train", "Train an agent on the first assignment subproblem");
  add_common(tr, c, true);
  tr->add_option("--agent", agent, "hybrid|classical");
  tr->add_option("--episodes", episodes, "Training episodes")->check(CLI::NonNegativeNumber);
  tr->add_flag("--grid", grid, "Run the {50,60} x {100,110} MHz bandwidth grid");

  auto* sw = app.add_subcommand("sweep", "Sweep one scenario parameter");
  add_common(sw, c, true);
  sw->add_option("--axis", axis, "task-bits|b-access-total|b-s-total")->required();
  sw->add_option("--values", values, "Comma-separated values in SI units")->required();
  sw->add_option("--method", methods, "Comma-separated methods");

  auto* gap = app.add_subcommand("duality-gap", "Primal and dual value per ADMM iteration");
  add_common(gap, c, true);
  gap->add_option("--method", method, "ADMM method")->default_val("admm-exhaustive");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_generate(c);
    if (*sol) return cmd_solve(c, method);
    if (*tr) return cmd_train(c, agent, episodes, grid);
    if (*sw) return cmd_sweep(c, axis, values, methods);
    if (*gap) return cmd_duality_gap(c, method);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const EnumerationCapExceeded& e) {
    std::cerr << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}
