#include "satedge/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace satedge {

namespace {

constexpr std::uint64_t kProbeCap = 1'000'000;

class ExhaustiveUpdater : public XUpdater {
 public:
  ExhaustiveUpdater(AscentSchedule schedule, int threads) : schedule_(schedule), minimizer_(threads) {}

  Result update(CandidateEvaluator& eval, const DualState& d0, int) override {
    const AscentResult a = ascend(d0, schedule_, minimizer_, eval);
    return {a.best_x, a.best, a.best_value};
  }

 private:
  AscentSchedule schedule_;
  ExhaustiveMinimizer minimizer_;
};

class AgentUpdater : public XUpdater {
 public:
  AgentUpdater(const AdmmSettings& st, const Scenario& s, std::uint64_t seed)
      : agent_(st.agent, EpisodeEnv::state_dim(s.n_ues(), s.n_servers()), s.n_servers(), seed),
        schedule_(st.ascent),
        first_(st.first_episodes),
        warm_(st.warm_episodes) {}

  Result update(CandidateEvaluator& eval, const DualState& d0, int attempt) override {
    const bool fresh = agent_.gradient_steps() == 0 && calls_ == 0;
    const int episodes = fresh ? first_ : warm_ * (attempt > 0 ? 2 : 1);
    ++calls_;
    XSubproblemResult r = solve_x_subproblem(agent_, eval, d0, schedule_, episodes, warm_);
    return {r.x, r.dual, r.dual_value};
  }

  HybridAgent& agent() { return agent_; }

 private:
  HybridAgent agent_;
  AscentSchedule schedule_;
  int first_;
  int warm_;
  int calls_ = 0;
};

double rel_norm(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  return nb > 0.0 ? a.norm() / nb : a.norm();
}

}  // namespace

std::string to_string(XSolverKind k) {
  switch (k) {
    case XSolverKind::Hybrid: return "hybrid";
    case XSolverKind::Classical: return "classical";
    case XSolverKind::Exhaustive: return "exhaustive";
  }
  return "unknown";
}

bool descent_check(double l_new, double l_old, double slack) { return l_new - l_old <= slack; }

std::unique_ptr<XUpdater> make_x_updater(const AdmmSettings& settings, const Scenario& s, std::uint64_t seed) {
  switch (settings.x_solver) {
    case XSolverKind::Exhaustive:
      return std::make_unique<ExhaustiveUpdater>(settings.ascent, settings.threads);
    case XSolverKind::Hybrid:
    case XSolverKind::Classical: {
      AdmmSettings st = settings;
      if (settings.x_solver == XSolverKind::Classical && st.agent.kind != AgentKind::Classical) {
        const CircuitSpec circuit = st.agent.circuit;
        st.agent = AgentSettings::classical();
        st.agent.circuit = circuit;
      }
      return std::make_unique<AgentUpdater>(st, s, seed);
    }
  }
  return nullptr;
}

BandwidthPlan initial_plan(const Scenario& s) {
  BandwidthPlan p = BandwidthPlan::zeros(s.n_ues(), s.n_servers());
  p.b_access.setConstant(s.radio.b_access_total_hz / s.n_ues());
  p.b_s.setConstant(s.radio.b_s_total_hz / s.n_ues());
  p.xi = p.flat_b();
  return p;
}

Outcome<Assignment> find_feasible_assignment(const Scenario& s, const BarrierSettings& barrier) {
  const std::uint64_t count = assignment_count(s.n_ues(), s.n_servers());
  if (count != 0 && count <= kProbeCap) {
    Infeasibility best{"latency", std::numeric_limits<double>::infinity(), ""};
    for (std::uint64_t i = 0; i < count; ++i) {
      const Assignment x = Assignment::from_index(i, s.n_ues(), s.n_servers());
      Outcome<BandwidthPlan> p = feasible_init(x, s, barrier);
      if (p.ok()) return x;
      if (p.infeasibility().violation < best.violation) best = p.infeasibility();
    }
    best.detail = "no assignment admits a feasible bandwidth plan; closest: " + best.detail;
    return best;
  }
  Assignment x(std::vector<int>(s.n_ues(), 0));
  for (int n = 0; n < s.n_ues(); ++n) x.server[n] = n % s.n_servers();
  Outcome<BandwidthPlan> p = feasible_init(x, s, barrier);
  if (p.ok()) return x;
  return p.infeasibility();
}

Outcome<AdmmResult> run_admm(const Scenario& s, const AdmmSettings& settings, std::uint64_t seed) {
  std::unique_ptr<XUpdater> updater = make_x_updater(settings, s, seed);
  return run_admm(s, settings, *updater);
}

Outcome<AdmmResult> run_admm(const Scenario& s, const AdmmSettings& st, XUpdater& updater) {
  if (!(st.rho > 0.0)) throw std::invalid_argument("run_admm: rho must be positive");
  Outcome<Assignment> probe = find_feasible_assignment(s, st.barrier);
  if (!probe.ok()) return probe.infeasibility();

  AdmmResult res;
  Assignment x = *probe;
  // Equal shares everywhere, except the probe's own links, which start
  // from a feasible plan so the first descent check compares real points.
  BandwidthPlan plan = initial_plan(s);
  {
    Outcome<BandwidthPlan> f = feasible_init(x, s, st.barrier);
    if (!f.ok()) return f.infeasibility();
    for (int n = 0; n < s.n_ues(); ++n) {
      const int j = x.server[n];
      plan.b_access(n, j) = f->b_access(n, j);
      if (j != s.bs_index()) plan.b_s(n, j) = f->b_s(n, j);
    }
    plan.xi = plan.flat_b();
  }
  DualState dual = DualState::zeros(s);

  for (int it = 0; it < st.max_iters; ++it) {
    const double l_old = augmented_lagrangian(x, plan, s, st.rho);
    const double slack = st.epsilon_rel * std::abs(l_old);
    IterateRow row;
    row.iter = it;
    row.lagrangian_prev = l_old;

    BandwidthPlan next;
    Assignment x_next = x;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      CandidateEvaluator eval(s, plan, st.candidate_plan, st.rho, st.barrier, st.lookahead_steps);
      const XUpdater::Result u = updater.update(eval, dual, attempt);
      res.candidate_evaluations += eval.evaluations();
      row.dual_value = u.dual_value;
      row.retries = attempt;
      const CandidateScore& sc = eval.score(u.x);
      if (!sc.feasible) continue;
      BandwidthPlan cand;
      if (st.candidate_plan == CandidatePlan::Lookahead || st.candidate_plan == CandidatePlan::LookaheadEnergy) {
        cand = sc.plan;
      } else {
        Outcome<BUpdate> b = solve_B_subproblem(u.x, plan, s, st.rho, st.barrier);
        if (!b.ok()) continue;
        cand = solve_xi_subproblem(u.x, b->plan, s, st.rho);
      }
      const double l_new = augmented_lagrangian(u.x, cand, s, st.rho);
      if (descent_check(l_new, l_old, slack)) {
        accepted = true;
        x_next = u.x;
        next = std::move(cand);
        dual = u.dual;
      }
    }
    if (!accepted) {
      Outcome<BUpdate> b = solve_B_subproblem(x, plan, s, st.rho, st.barrier);
      if (!b.ok()) return b.infeasibility();
      next = solve_xi_subproblem(x, b->plan, s, st.rho);
      x_next = x;
    }
    row.accepted = accepted;
    row.x = x_next;
    row.lagrangian = augmented_lagrangian(x_next, next, s, st.rho);
    row.energy = total_energy(x_next, next, s, false);

    const Eigen::VectorXd xi_change = next.xi - plan.xi;
    next = update_varpi(next);
    const Eigen::VectorXd b = next.flat_b();
    row.consensus = (b - next.xi).norm();
    row.xi_change = xi_change.norm();
    res.log.push_back(row);

    const bool same_x = x_next == x;
    x = x_next;
    plan = std::move(next);
    if (it > 0 && same_x && rel_norm(b - plan.xi, b) <= st.primal_tol && rel_norm(xi_change, plan.xi) <= st.dual_tol) {
      res.converged = true;
      break;
    }
  }

  res.x = x;
  res.plan = plan;
  res.energy = total_energy(x, plan, s, false);
  res.residuals = residuals(x, plan, s);
  res.final_lagrangian = augmented_lagrangian(x, plan, s, st.rho);
  res.final_dual = res.log.empty() ? 0.0 : res.log.back().dual_value;
  return res;
}

}  // namespace satedge
