#include "satedge/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace satedge {

using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ordered_json vec(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json mat(const Eigen::MatrixXd& m) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

ordered_json assignment_matrix(const Assignment& x, int n_servers) {
  ordered_json a = ordered_json::array();
  for (int n = 0; n < static_cast<int>(x.server.size()); ++n) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < n_servers; ++j) row.push_back(x.x(n, j));
    a.push_back(row);
  }
  return a;
}

ordered_json residual_json(const ConstraintResiduals& r, const Scenario& s) {
  return {{"assignment", vec(r.assignment)},
          {"latency_s", vec(r.latency)},
          {"access_total_hz", r.access_total},
          {"backhaul_total_hz", r.backhaul_total},
          {"sat_energy_j", vec(r.sat_energy)},
          {"consensus_norm_hz", r.consensus.norm()},
          {"min_bandwidth_hz", r.min_bandwidth},
          {"feasible_1e-9", r.feasible(s, 1e-9)}};
}

ordered_json header_json(const Scenario& s, std::string_view method, const AdmmSettings& settings,
                         std::uint64_t seed) {
  ordered_json doc;
  doc["tool_version"] = SATEDGE_VERSION;
  doc["method"] = method;
  doc["seed"] = seed;
  doc["settings_hash"] = settings_hash(settings);
  doc["settings"] = ordered_json::parse(settings_json(settings));
  doc["scenario"] = ordered_json::parse(to_document(s));
  return doc;
}

AdmmSettings for_method(const AdmmSettings& settings, Method m) {
  AdmmSettings st = settings;
  switch (m) {
    case Method::AdmmHybrid:
      st.x_solver = XSolverKind::Hybrid;
      if (st.agent.kind != AgentKind::Hybrid) st.agent = AgentSettings::hybrid();
      break;
    case Method::AdmmClassical: st.x_solver = XSolverKind::Classical; break;
    default: st.x_solver = XSolverKind::Exhaustive; break;
  }
  return st;
}

std::string mhz_tag(double hz) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", hz / 1e6);
  return buf;
}

}  // namespace

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : all_methods())
    if (to_string(m) == name) return m;
  return std::nullopt;
}

std::string to_string(Method m) {
  switch (m) {
    case Method::AdmmHybrid: return "admm-hybrid";
    case Method::AdmmClassical: return "admm-classical";
    case Method::AdmmExhaustive: return "admm-exhaustive";
    case Method::Exhaustive: return "exhaustive";
    case Method::EqualBandwidth: return "equal-bandwidth";
  }
  return "unknown";
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all{Method::AdmmHybrid, Method::AdmmClassical, Method::AdmmExhaustive,
                                       Method::Exhaustive, Method::EqualBandwidth};
  return all;
}

Outcome<Solution> solve(const Scenario& s, Method m, const AdmmSettings& settings, std::uint64_t seed) {
  const auto t0 = Clock::now();
  Solution sol;
  sol.method = m;
  if (m == Method::Exhaustive || m == Method::EqualBandwidth) {
    Outcome<BaselineResult> r = m == Method::Exhaustive
                                    ? exhaustive_search(s, {1'000'000, settings.threads, settings.barrier})
                                    : equal_bandwidth(s, XSolverKind::Exhaustive, settings, seed);
    if (!r.ok()) return r.infeasibility();
    sol.x = r->x;
    sol.plan = r->plan;
    sol.energy = r->energy;
    sol.residuals = r->residuals;
    sol.evaluations = r->enumerated;
  } else {
    Outcome<AdmmResult> r = run_admm(s, for_method(settings, m), seed);
    if (!r.ok()) return r.infeasibility();
    sol.x = r->x;
    sol.plan = r->plan;
    sol.energy = r->energy;
    sol.residuals = r->residuals;
    sol.converged = r->converged;
    sol.log = std::move(r->log);
    sol.final_dual = r->final_dual;
    sol.evaluations = r->candidate_evaluations;
  }
  sol.seconds = since(t0);
  return sol;
}

std::string settings_json(const AdmmSettings& st) {
  const AgentSettings& a = st.agent;
  ordered_json j;
  j["rho_j_per_mhz2"] = st.rho;
  j["max_iters"] = st.max_iters;
  j["primal_tol"] = st.primal_tol;
  j["dual_tol"] = st.dual_tol;
  j["epsilon_rel"] = st.epsilon_rel;
  j["x_solver"] = to_string(st.x_solver);
  j["candidate_plan"] = static_cast<int>(st.candidate_plan);
  j["lookahead_steps"] = st.lookahead_steps;
  j["ascent"] = {{"alpha0", st.ascent.alpha0}, {"iters", st.ascent.iters}};
  j["barrier"] = {{"t0", st.barrier.t0},
                  {"mu", st.barrier.mu},
                  {"newton_tol", st.barrier.newton_tol},
                  {"max_newton_iters", st.barrier.max_newton_iters},
                  {"outer_iters", st.barrier.outer_iters},
                  {"gap_tol", st.barrier.gap_tol},
                  {"floor_hz", st.barrier.floor_hz}};
  j["agent"] = {{"kind", a.kind == AgentKind::Hybrid ? "hybrid" : "classical"},
                {"hidden", a.hidden},
                {"n_qubits", a.circuit.n_qubits},
                {"n_layers", a.circuit.n_layers},
                {"entangle", a.circuit.entangle},
                {"w_c_init", a.w_c_init},
                {"w_q_init", a.w_q_init},
                {"train_mixers", a.train_mixers},
                {"replay_capacity", a.replay_capacity},
                {"batch", a.batch},
                {"eps_start", a.eps_start},
                {"eps_end", a.eps_end},
                {"eps_decay_frac", a.eps_decay_frac},
                {"eps_warm_start", a.eps_warm_start},
                {"target_sync", a.target_sync},
                {"grad_steps_per_episode", a.grad_steps_per_episode},
                {"lr_classical", a.lr_classical},
                {"lr_quantum", a.lr_quantum},
                {"gamma", a.gamma},
                {"huber_delta", a.huber_delta}};
  j["first_episodes"] = st.first_episodes;
  j["warm_episodes"] = st.warm_episodes;
  return j.dump();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string settings_hash(const AdmmSettings& settings) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(settings_json(settings))));
  return buf;
}

CsvMeta CsvMeta::make(std::string_view kind, const AdmmSettings& settings, std::uint64_t seed) {
  CsvMeta m;
  m.add("satedge", SATEDGE_VERSION);
  m.add("kind", std::string(kind));
  m.add("settings_hash", settings_hash(settings));
  m.add("seed", std::to_string(seed));
  return m;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_csv(const std::filesystem::path& path, const CsvMeta& meta, const CsvRow& header,
               const std::vector<CsvRow>& rows) {
  std::string text;
  for (const auto& [k, v] : meta.entries) text += "# " + k + ": " + v + "\n";
  auto line = [&](const CsvRow& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) text += ',';
      text += r[i];
    }
    text += '\n';
  };
  line(header);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw std::logic_error("write_csv: row width differs from header");
    line(r);
  }
  write_text(path, text);
}

std::string result_document(const Scenario& s, const Solution& sol, const AdmmSettings& settings, std::uint64_t seed) {
  ordered_json doc = header_json(s, to_string(sol.method), settings, seed);
  doc["status"] = "ok";
  doc["converged"] = sol.converged;
  doc["iterations"] = sol.log.size();
  doc["energy_j"] = sol.energy;
  doc["assignment"] = sol.x.server;
  doc["assignment_matrix"] = assignment_matrix(sol.x, s.n_servers());
  doc["bandwidth"] = {{"b_access_hz", mat(sol.plan.b_access)},
                      {"b_s_hz", mat(sol.plan.b_s)},
                      {"xi_hz", vec(sol.plan.xi)},
                      {"varpi_hz", vec(sol.plan.varpi)}};
  doc["residuals"] = residual_json(sol.residuals, s);
  doc["final_dual"] = sol.final_dual;
  doc["candidate_evaluations"] = sol.evaluations;
  return doc.dump(2) + "\n";
}

std::string infeasible_document(const Scenario& s, Method m, const Infeasibility& why, const AdmmSettings& settings,
                                std::uint64_t seed) {
  ordered_json doc = header_json(s, to_string(m), settings, seed);
  doc["status"] = "infeasible";
  doc["constraint"] = why.constraint;
  doc["violation"] = why.violation;
  doc["detail"] = why.detail;
  return doc.dump(2) + "\n";
}

void write_iterate_csv(const std::filesystem::path& path, const std::vector<IterateRow>& log, const CsvMeta& meta) {
  std::vector<CsvRow> rows;
  for (const IterateRow& r : log)
    rows.push_back({std::to_string(r.iter), format_double(r.lagrangian), format_double(r.lagrangian_prev),
                    format_double(r.energy), format_double(r.consensus), format_double(r.xi_change),
                    format_double(r.dual_value), r.x.to_string(), r.accepted ? "1" : "0", std::to_string(r.retries)});
  write_csv(path, meta,
            {"iter", "lagrangian", "lagrangian_prev", "energy_j", "consensus_hz", "xi_change_hz", "dual_value",
             "assignment", "accepted", "retries"},
            rows);
}

void write_timing(const std::filesystem::path& path, const std::vector<std::pair<std::string, double>>& seconds) {
  ordered_json j;
  for (const auto& [k, v] : seconds) j[k] = v;
  write_text(path, j.dump(2) + "\n");
}

std::optional<SweepAxis> parse_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::TaskBits, SweepAxis::BAccessTotal, SweepAxis::BSTotal})
    if (to_string(a) == name) return a;
  return std::nullopt;
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::TaskBits: return "task-bits";
    case SweepAxis::BAccessTotal: return "b-access-total";
    case SweepAxis::BSTotal: return "b-s-total";
  }
  return "unknown";
}

Scenario with_axis(const Scenario& base, SweepAxis axis, double value) {
  Scenario s = base;
  switch (axis) {
    case SweepAxis::TaskBits: std::fill(s.topology.task_bits.begin(), s.topology.task_bits.end(), value); break;
    case SweepAxis::BAccessTotal: s.radio.b_access_total_hz = value; break;
    case SweepAxis::BSTotal: s.radio.b_s_total_hz = value; break;
  }
  const std::vector<std::string> problems = validate(s);
  if (!problems.empty()) {
    // An unreachable latency budget is a property of the point, not a bad input.
    const bool only_budget = std::all_of(problems.begin(), problems.end(), [](const std::string& p) {
      return p.find("latency budget unreachable") != std::string::npos;
    });
    if (!only_budget) throw ConfigError(to_string(axis) + "=" + format_double(value) + ": " + problems.front());
  }
  return s;
}

std::vector<SweepRow> sweep(const Scenario& base, SweepAxis axis, const std::vector<double>& values,
                            const std::vector<Method>& methods, const AdmmSettings& settings, std::uint64_t seed,
                            int threads) {
  if (values.empty()) throw ConfigError("sweep: empty value list");
  if (methods.empty()) throw ConfigError("sweep: no methods");
  std::vector<Scenario> points;
  for (double v : values) points.push_back(with_axis(base, axis, v));

  const std::size_t total = values.size() * methods.size();
  std::vector<SweepRow> rows(total);
  AdmmSettings st = settings;
  st.threads = 1;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      const std::size_t vi = k / methods.size(), mi = k % methods.size();
      SweepRow& row = rows[k];
      row.value = values[vi];
      row.method = methods[mi];
      try {
        const auto t0 = Clock::now();
        Outcome<Solution> r = solve(points[vi], methods[mi], st, seed);
        row.seconds = since(t0);
        if (r.ok()) {
          row.feasible = true;
          row.energy = r->energy;
          row.assignment = r->x.to_string();
          row.status = "ok";
        } else {
          row.energy = std::numeric_limits<double>::quiet_NaN();
          row.status = "infeasible:" + r.infeasibility().constraint;
        }
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(total)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, SweepAxis axis, const std::vector<SweepRow>& rows,
                     const CsvMeta& meta) {
  std::vector<CsvRow> out;
  for (const SweepRow& r : rows)
    out.push_back({format_double(r.value), to_string(r.method), r.status, format_double(r.energy),
                   r.assignment.empty() ? "-" : r.assignment});
  CsvMeta m = meta;
  m.add("axis", to_string(axis));
  write_csv(path, m, {"value", "method", "status", "energy_j", "assignment"}, out);
}

CandidateEvaluator training_evaluator(const Scenario& s, const AdmmSettings& settings) {
  return CandidateEvaluator(s, initial_plan(s), settings.candidate_plan, settings.rho, settings.barrier,
                            settings.lookahead_steps);
}

double best_reward(CandidateEvaluator& eval, const DualState& d) {
  const Scenario& s = eval.scenario();
  EpisodeEnv env(eval, d);
  const std::uint64_t count = assignment_count(s.n_ues(), s.n_servers());
  if (count == 0 || count > 1'000'000) throw EnumerationCapExceeded(count, 1'000'000);
  eval.prefetch_all(1);
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < count; ++i)
    best = std::max(best, env.reward_of(Assignment::from_index(i, s.n_ues(), s.n_servers())));
  return best;
}

TrainingRun train_agent(const Scenario& s, AgentKind kind, int episodes, const AdmmSettings& settings,
                        std::uint64_t seed, const std::filesystem::path& checkpoint) {
  if (episodes < 0) throw ConfigError("episodes must be non-negative");
  AgentSettings as = kind == AgentKind::Hybrid ? AgentSettings::hybrid() : AgentSettings::classical();
  if (settings.agent.kind == kind) as = settings.agent;
  CandidateEvaluator eval = training_evaluator(s, settings);
  const DualState d = DualState::zeros(s);
  TrainingRun run;
  run.best_possible = best_reward(eval, d);
  HybridAgent agent(as, EpisodeEnv::state_dim(s.n_ues(), s.n_servers()), s.n_servers(), seed);
  EpisodeEnv env(eval, d);
  const auto t0 = Clock::now();
  run.result = train(agent, env, episodes);
  run.seconds = since(t0);
  if (!checkpoint.empty()) {
    if (checkpoint.has_parent_path()) std::filesystem::create_directories(checkpoint.parent_path());
    agent.save(checkpoint);
  }
  return run;
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurveRow>& curve, const CsvMeta& meta) {
  std::vector<CsvRow> rows;
  for (const CurveRow& r : curve)
    rows.push_back({std::to_string(r.episode), format_double(r.epsilon), format_double(r.greedy_reward),
                    format_double(r.loss)});
  write_csv(path, meta, {"episode", "epsilon", "greedy_reward", "loss"}, rows);
}

Outcome<GapReport> duality_gap_run(const Scenario& s, Method m, const AdmmSettings& settings, std::uint64_t seed) {
  if (m == Method::Exhaustive || m == Method::EqualBandwidth)
    throw ConfigError("duality-gap needs an ADMM method, got " + to_string(m));
  Outcome<Solution> r = solve(s, m, settings, seed);
  if (!r.ok()) return r.infeasibility();
  GapReport rep;
  for (const IterateRow& row : r->log) {
    const DualityGap g = duality_gap(row.energy, row.dual_value);
    rep.rows.push_back({row.iter, row.energy, row.dual_value, g.relative});
  }
  rep.final_primal = r->energy;
  rep.final_dual = r->final_dual;
  rep.final_relative = duality_gap(rep.final_primal, rep.final_dual).relative;
  rep.solution = std::move(*r);
  return rep;
}

void write_gap_csv(const std::filesystem::path& path, const GapReport& report, const CsvMeta& meta) {
  std::vector<CsvRow> rows;
  for (const GapRow& g : report.rows)
    rows.push_back({std::to_string(g.iter), format_double(g.primal), format_double(g.dual), format_double(g.relative)});
  CsvMeta m = meta;
  m.add("final_relative_gap", format_double(report.final_relative));
  write_csv(path, m, {"iter", "primal_j", "dual_j", "relative_gap"}, rows);
}

namespace files {
std::string result(Method m) { return "result_" + to_string(m) + ".json"; }
std::string iterates(Method m) { return "iterates_" + to_string(m) + ".csv"; }
std::string curve(AgentKind k, double b_access_hz, double b_s_hz) {
  return std::string("curve_") + (k == AgentKind::Hybrid ? "hybrid" : "classical") + "_ba" + mhz_tag(b_access_hz) +
         "_bs" + mhz_tag(b_s_hz) + ".csv";
}
std::string checkpoint(AgentKind k, double b_access_hz, double b_s_hz) {
  return std::string("agent_") + (k == AgentKind::Hybrid ? "hybrid" : "classical") + "_ba" + mhz_tag(b_access_hz) +
         "_bs" + mhz_tag(b_s_hz) + ".ckpt";
}
std::string sweep(SweepAxis a) { return "sweep_" + to_string(a) + ".csv"; }
std::string timing(const std::string& output_name) { return output_name + ".timing.json"; }
}  // namespace files

}  // namespace satedge
