// Acceptance checks for the optimizer. Prints one PASS/FAIL line per
// criterion and exits non-zero when any fails. Criterion names given on the
// command line restrict the run to those.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "kron_oracle.hpp"
#include "pg_oracle.hpp"
#include "satedge/orchestrator.hpp"

using namespace satedge;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Solutions shared between criteria, computed on first use.
class Cache {
 public:
  const Solution& get(int seed, Method m) {
    auto key = std::make_pair(seed, m);
    auto it = sols_.find(key);
    if (it != sols_.end()) return it->second;
    Outcome<Solution> r = solve(generate_scenario(seed), m, AdmmSettings{}, seed);
    if (!r.ok()) throw std::runtime_error(to_string(m) + " infeasible on seed " + std::to_string(seed));
    return sols_.emplace(key, std::move(*r)).first->second;
  }
  const GapReport& gap(int seed) {
    auto it = gaps_.find(seed);
    if (it != gaps_.end()) return it->second;
    Outcome<GapReport> r = duality_gap_run(generate_scenario(seed), Method::AdmmHybrid, AdmmSettings{}, seed);
    if (!r.ok()) throw std::runtime_error("admm-hybrid infeasible on seed " + std::to_string(seed));
    sols_.emplace(std::make_pair(seed, Method::AdmmHybrid), r->solution);
    return gaps_.emplace(seed, std::move(*r)).first->second;
  }
  std::vector<std::pair<int, const Solution*>> admm_runs() const {
    std::vector<std::pair<int, const Solution*>> out;
    for (const auto& [k, s] : sols_)
      if (k.second == Method::AdmmHybrid || k.second == Method::AdmmExhaustive || k.second == Method::AdmmClassical)
        out.emplace_back(k.first, &s);
    return out;
  }

 private:
  std::map<std::pair<int, Method>, Solution> sols_;
  std::map<int, GapReport> gaps_;
};

Cache cache;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Verdict global_optimality() {
  const double ex = cache.get(0, Method::Exhaustive).energy;
  const double ad = cache.get(0, Method::AdmmExhaustive).energy;
  const double r = rel(ad, ex);
  return {r <= 1e-4, "seed 0 admm-exhaustive " + fmt("%.12g", ad) + " J vs exhaustive " + fmt("%.12g", ex) +
                         " J, rel " + fmt("%.2e", r)};
}

Verdict hybrid_quality() {
  Verdict v;
  for (int seed = 0; seed < 3; ++seed) {
    cache.gap(seed);
    const double hy = cache.get(seed, Method::AdmmHybrid).energy;
    const double ex = cache.get(seed, Method::Exhaustive).energy;
    const double r = (hy - ex) / ex;
    v.pass = v.pass && r <= 0.05;
    v.detail += (seed ? ", " : "") + std::string("seed ") + std::to_string(seed) + " " + fmt("%+.2e", r);
  }
  return v;
}

Verdict duality_gap_seed0() {
  const GapReport& g = cache.gap(0);
  return {g.final_relative <= 0.05 && g.final_relative >= -1e-9,
          "admm-hybrid seed 0 final relative gap " + fmt("%.3e", g.final_relative)};
}

Verdict baseline_dominance() {
  const std::vector<double> bits{3e5, 4e5, 5e5, 6e5, 7e5};
  const auto rows = sweep(generate_scenario(0), SweepAxis::TaskBits, bits,
                          {Method::AdmmExhaustive, Method::EqualBandwidth}, AdmmSettings{}, 0, 1);
  Verdict v;
  int compared = 0;
  double least = INFINITY;
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    const SweepRow& joint = rows[i];
    const SweepRow& equal = rows[i + 1];
    if (!equal.feasible) continue;
    ++compared;
    if (joint.feasible) least = std::min(least, (equal.energy - joint.energy) / equal.energy);
    if (!joint.feasible || joint.energy > equal.energy * (1.0 + 1e-12)) {
      v.pass = false;
      v.detail += "violated at I=" + fmt("%g", joint.value) + "; ";
    }
  }
  v.detail += std::to_string(compared) + " of " + std::to_string(bits.size()) + " points comparable, smallest saving " +
              fmt("%.2f%%", 100.0 * least);
  if (compared == 0) v.pass = false;
  return v;
}

Verdict bandwidth_monotonicity() {
  std::map<std::pair<double, double>, double> e;
  for (double ba : {50e6, 60e6})
    for (double bs : {100e6, 110e6}) {
      Scenario s = generate_scenario(0);
      s.radio.b_access_total_hz = ba;
      s.radio.b_s_total_hz = bs;
      Outcome<Solution> r = solve(s, Method::AdmmExhaustive, AdmmSettings{}, 0);
      if (!r.ok()) return {false, "infeasible grid point"};
      e[{ba, bs}] = r->energy;
    }
  const double tol = 1e-6;
  auto le = [&](double a, double b) { return a <= b * (1.0 + tol); };
  const bool ok = le(e[{60e6, 100e6}], e[{50e6, 100e6}]) && le(e[{60e6, 110e6}], e[{50e6, 110e6}]) &&
                  le(e[{50e6, 110e6}], e[{50e6, 100e6}]) && le(e[{60e6, 110e6}], e[{60e6, 100e6}]);
  std::string d;
  for (const auto& [k, val] : e) d += fmt("(%g", k.first / 1e6) + fmt(",%g)=", k.second / 1e6) + fmt("%.9g ", val);
  return {ok, d + "J"};
}

Verdict agent_convergence() {
  Verdict v;
  for (AgentKind k : {AgentKind::Classical, AgentKind::Hybrid})
    for (int seed = 0; seed < 3; ++seed) {
      const TrainingRun run = train_agent(generate_scenario(seed), k, 2000, AdmmSettings{}, seed);
      int reached = -1;
      const double need = run.best_possible - 0.05 * std::abs(run.best_possible);
      for (const CurveRow& row : run.result.curve)
        if (row.greedy_reward >= need) {
          reached = row.episode;
          break;
        }
      v.pass = v.pass && reached >= 0;
      v.detail += std::string(k == AgentKind::Hybrid ? "hybrid" : "classical") + "/" + std::to_string(seed) + "@" +
                  (reached >= 0 ? std::to_string(reached) : "never") + " ";
    }
  v.detail += "(episode reaching 95%)";
  return v;
}

Verdict degeneracy() {
  const Scenario s = generate_scenario(0);
  const AdmmSettings st;
  CandidateEvaluator ea = training_evaluator(s, st), eb = training_evaluator(s, st);
  const DualState d = DualState::zeros(s);
  AgentSettings hy = AgentSettings::hybrid();
  hy.w_c_init = 1.0;
  hy.w_q_init = 0.0;
  hy.train_mixers = false;
  AgentSettings cl = AgentSettings::classical();
  cl.hidden = hy.hidden;
  const int dim = EpisodeEnv::state_dim(s.n_ues(), s.n_servers());
  HybridAgent a(hy, dim, s.n_servers(), 7), b(cl, dim, s.n_servers(), 7);
  EpisodeEnv env_a(ea, d), env_b(eb, d);
  const TrainResult ra = train(a, env_a, 200), rb = train(b, env_b, 200);

  double worst = 0.0;
  if (ra.curve.size() != rb.curve.size()) return {false, "curve lengths differ"};
  for (std::size_t i = 0; i < ra.curve.size(); ++i) {
    worst = std::max(worst, std::abs(ra.curve[i].greedy_reward - rb.curve[i].greedy_reward));
    const double la = ra.curve[i].loss, lb = rb.curve[i].loss;
    if (std::isnan(la) != std::isnan(lb)) worst = INFINITY;
    else if (!std::isnan(la)) worst = std::max(worst, std::abs(la - lb));
  }
  worst = std::max(worst, (a.classical_net().flat_params() - b.classical_net().flat_params()).cwiseAbs().maxCoeff());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(dim, [&] { return g(rng); });
    worst = std::max(worst, (a.q_values(x) - b.q_values(x)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-12, "200 episodes, max deviation " + fmt("%.1e", worst)};
}

Verdict numerical_kernels() {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-kron_oracle::kPi, kron_oracle::kPi);

  // Dense net gradient.
  DenseNet<double> net({6, 16, 8, 4}, 3);
  Eigen::MatrixXd in = Eigen::MatrixXd::NullaryExpr(6, 5, [&] { return g(rng); });
  Eigen::MatrixXd dout = Eigen::MatrixXd::NullaryExpr(4, 5, [&] { return g(rng); });
  auto grads = net.zero_grads();
  net.backward(in, dout, grads);
  const Eigen::VectorXd an = DenseNet<double>::flatten(grads), p0 = net.flat_params();
  double mlp_err = 0.0;
  for (Eigen::Index k = 0; k < p0.size(); ++k) {
    Eigen::VectorXd p = p0;
    p[k] += 1e-6;
    net.set_flat_params(p);
    const double up = (net.forward_batch(in).array() * dout.array()).sum();
    p[k] -= 2e-6;
    net.set_flat_params(p);
    const double dn = (net.forward_batch(in).array() * dout.array()).sum();
    const double fd = (up - dn) / 2e-6;
    mlp_err = std::max(mlp_err, std::abs(fd - an[k]) / std::max(1.0, std::abs(fd)));
  }

  // Parameter shift against central differences.
  CircuitSpec spec{8, 2, 4, true};
  Eigen::VectorXd angles = Eigen::VectorXd::NullaryExpr(spec.n_angles(), [&] { return u(rng); });
  Eigen::VectorXd params = Eigen::VectorXd::NullaryExpr(spec.n_params(), [&] { return u(rng); });
  const Eigen::MatrixXd ps = parameter_shift_grad(spec, angles, params);
  double ps_err = 0.0;
  for (int k = 0; k < spec.n_params(); ++k) {
    Eigen::VectorXd a = params, b = params;
    a[k] += 1e-5;
    b[k] -= 1e-5;
    ps_err = std::max(ps_err, ((run(spec, angles, a) - run(spec, angles, b)) / 2e-5 - ps.col(k)).cwiseAbs().maxCoeff());
  }

  // Norm drift.
  StateVector psi = zero_state(8);
  std::uniform_int_distribution<int> kind(0, 3), q(0, 7);
  for (int i = 0; i < 1000; ++i) {
    GateOp op{static_cast<GateKind>(kind(rng)), q(rng)};
    if (op.kind == GateKind::CNOT) op.q1 = (op.q0 + 1 + q(rng) % 7) % 8;
    else op.angle = u(rng);
    apply_gate(psi, op);
  }
  const double drift = std::abs(norm(psi) - 1.0);

  // Kronecker oracle.
  double kron_err = 0.0;
  for (int n = 1; n <= 4; ++n) {
    CircuitSpec c{n, 2, n, true};
    Eigen::VectorXd an_ = Eigen::VectorXd::NullaryExpr(c.n_angles(), [&] { return u(rng); });
    Eigen::VectorXd pa = Eigen::VectorXd::NullaryExpr(c.n_params(), [&] { return u(rng); });
    const StateVector st = run_state(c, an_, pa);
    const Eigen::VectorXcd ref = kron_oracle::run(build_circuit(c, an_, pa), n);
    for (std::size_t i = 0; i < st.size(); ++i) kron_err = std::max(kron_err, std::abs(st[i] - ref[Eigen::Index(i)]));
  }

  const bool ok = mlp_err <= 1e-5 && ps_err <= 1e-6 && drift <= 1e-10 && kron_err <= 1e-10;
  return {ok, "mlp " + fmt("%.1e", mlp_err) + ", shift " + fmt("%.1e", ps_err) + ", drift " + fmt("%.1e", drift) +
                  ", kron " + fmt("%.1e", kron_err)};
}

Verdict admm_contracts() {
  for (int seed = 0; seed < 3; ++seed) cache.get(seed, Method::AdmmExhaustive);
  const AdmmSettings st;
  Verdict v;
  int checked = 0, rows = 0;
  double worst_cons = 0.0;
  for (const auto& [seed, sol] : cache.admm_runs()) {
    ++checked;
    const Scenario s = generate_scenario(seed);
    for (const IterateRow& r : sol->log) {
      if (!r.accepted) continue;
      ++rows;
      if (r.lagrangian - r.lagrangian_prev > st.epsilon_rel * std::abs(r.lagrangian_prev)) {
        v.pass = false;
        v.detail += "descent violated seed " + std::to_string(seed) + " iter " + std::to_string(r.iter) + "; ";
      }
    }
    const Eigen::VectorXd b = sol->plan.flat_b();
    const double cons = (b - sol->plan.xi).norm() / b.norm();
    worst_cons = std::max(worst_cons, cons);
    if (cons > 1e-6 || !sol->residuals.feasible(s, 1e-9) || !sol->converged) {
      v.pass = false;
      v.detail += to_string(sol->method) + " seed " + std::to_string(seed) + " exit check failed; ";
    }
  }
  v.detail += std::to_string(checked) + " runs, " + std::to_string(rows) + " accepted iterations, consensus " +
              fmt("%.1e", worst_cons);
  return v;
}

Verdict convex_solver() {
  double worst = 0.0, worst_kkt = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    const Scenario s = generate_scenario(inst);
    std::mt19937_64 rng(5000 + inst);
    std::uniform_int_distribution<int> pick(0, s.n_servers() - 1);
    Assignment x;
    for (;;) {
      std::vector<int> srv(s.n_ues());
      for (int& j : srv) j = pick(rng);
      x = Assignment(srv);
      if (feasible_init(x, s).ok()) break;
    }
    Outcome<FixedAssignmentSolution> sol = solve_given_assignment(x, s);
    if (!sol.ok()) return {false, "instance " + std::to_string(inst) + " reported infeasible"};
    const oracle::Problem p(x, s, true, 0.0);
    const oracle::Result ref = oracle::solve(p);
    worst = std::max(worst, rel(sol->energy, ref.energy));
    worst_kkt = std::max(worst_kkt, sol->stats.kkt_residual);
  }
  return {worst <= 1e-6 && worst_kkt <= 1e-8,
          "20 instances, max rel diff " + fmt("%.1e", worst) + ", max KKT " + fmt("%.1e", worst_kkt)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"global-optimality", global_optimality},
      {"hybrid-quality", hybrid_quality},
      {"duality-gap", duality_gap_seed0},
      {"baseline-dominance", baseline_dominance},
      {"bandwidth-monotonicity", bandwidth_monotonicity},
      {"agent-convergence", agent_convergence},
      {"degeneracy", degeneracy},
      {"numerical-kernels", numerical_kernels},
      {"admm-contracts", admm_contracts},
      {"convex-solver", convex_solver},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  for (const std::string& name : only) {
    bool known = false;
    for (const auto& c : criteria) known = known || c.first == name;
    if (!known) {
      std::fprintf(stderr, "unknown criterion: %s\n", name.c_str());
      return 2;
    }
  }

  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && !only.contains(name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str(), sec);
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
