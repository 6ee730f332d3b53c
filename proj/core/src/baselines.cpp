#include "satedge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>
#include <vector>

namespace satedge {

namespace {

constexpr double kNoPlan = std::numeric_limits<double>::quiet_NaN();

// Runs f(i) for i in [0, count) over contiguous index ranges.
template <class F>
void parallel_range(std::uint64_t count, int threads, F&& f) {
  const std::uint64_t t = std::clamp<std::uint64_t>(threads < 1 ? 1 : threads, 1, std::max<std::uint64_t>(count, 1));
  if (t == 1) {
    for (std::uint64_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::uint64_t chunk = (count + t - 1) / t;
  for (std::uint64_t k = 0; k < t; ++k) {
    const std::uint64_t lo = k * chunk, hi = std::min(count, lo + chunk);
    pool.emplace_back([lo, hi, &f] {
      for (std::uint64_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

EnumerationCapExceeded::EnumerationCapExceeded(std::uint64_t count_, std::uint64_t cap_)
    : std::runtime_error("enumeration refused: " + std::to_string(count_) + " assignments exceed the cap of " +
                         std::to_string(cap_)),
      count(count_),
      cap(cap_) {}

Outcome<BaselineResult> exhaustive_search(const Scenario& s, const ExhaustiveOptions& opt) {
  const std::uint64_t count = assignment_count(s.n_ues(), s.n_servers());
  if (count == 0 || count > opt.cap) throw EnumerationCapExceeded(count, opt.cap);

  std::vector<double> energy(count, kNoPlan);
  std::vector<double> violation(count, std::numeric_limits<double>::infinity());
  std::vector<std::string> reason(count);
  parallel_range(count, opt.threads, [&](std::uint64_t i) {
    const Assignment x = Assignment::from_index(i, s.n_ues(), s.n_servers());
    Outcome<FixedAssignmentSolution> r = solve_given_assignment(x, s, opt.barrier);
    if (r.ok()) {
      energy[i] = r->energy;
    } else {
      violation[i] = r.infeasibility().violation;
      reason[i] = r.infeasibility().constraint;
    }
  });

  BaselineResult out;
  out.enumerated = count;
  std::uint64_t best = count;
  std::uint64_t closest = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    if (std::isnan(energy[i])) {
      if (violation[i] < violation[closest]) closest = i;
      continue;
    }
    ++out.feasible;
    if (best == count || energy[i] < energy[best]) best = i;
  }
  if (best == count) {
    const Assignment x = Assignment::from_index(closest, s.n_ues(), s.n_servers());
    return Infeasibility{reason[closest].empty() ? "latency" : reason[closest], violation[closest],
                         "no assignment admits a feasible bandwidth plan; closest is " + x.to_string()};
  }

  out.x = Assignment::from_index(best, s.n_ues(), s.n_servers());
  Outcome<FixedAssignmentSolution> r = solve_given_assignment(out.x, s, opt.barrier);
  if (!r.ok()) return r.infeasibility();
  out.plan = r->plan;
  out.energy = r->energy;
  out.residuals = residuals(out.x, out.plan, s);
  return out;
}

Outcome<BaselineResult> equal_bandwidth(const Scenario& s, XSolverKind solver, const AdmmSettings& settings,
                                        std::uint64_t seed) {
  CandidateEvaluator eval(s, BandwidthPlan::zeros(s.n_ues(), s.n_servers()), CandidatePlan::EqualSplit, settings.rho,
                          settings.barrier);
  const DualState d = DualState::zeros(s);
  BaselineResult out;

  if (solver == XSolverKind::Exhaustive) {
    const std::uint64_t count = assignment_count(s.n_ues(), s.n_servers());
    if (count == 0 || count > 1'000'000) throw EnumerationCapExceeded(count, 1'000'000);
    ExhaustiveMinimizer m(settings.threads);
    out.x = m.minimize(eval, d);
    out.enumerated = count;
    for (std::uint64_t i = 0; i < count; ++i)
      if (eval.score(Assignment::from_index(i, s.n_ues(), s.n_servers())).feasible) ++out.feasible;
  } else {
    AgentSettings agent = settings.agent;
    if (solver == XSolverKind::Classical && agent.kind != AgentKind::Classical) {
      const CircuitSpec circuit = agent.circuit;
      agent = AgentSettings::classical();
      agent.circuit = circuit;
    }
    HybridAgent a(agent, EpisodeEnv::state_dim(s.n_ues(), s.n_servers()), s.n_servers(), seed);
    AgentMinimizer m(a, settings.first_episodes);
    out.x = repair_assignment(m.minimize(eval, d), eval, d);
    out.enumerated = eval.evaluations();
  }

  const CandidateScore& c = eval.score(out.x);
  if (!c.feasible) {
    const ConstraintResiduals r = residuals(out.x, equal_split(out.x, s), s);
    std::string which = "latency";
    if (r.sat_energy.size() > 0 && r.sat_energy.maxCoeff() > 0.0) which = "sat_energy";
    return Infeasibility{which, c.violation, "no assignment is feasible under the equal bandwidth split"};
  }
  out.plan = c.plan;
  out.energy = c.objective;
  out.residuals = residuals(out.x, out.plan, s);
  return out;
}

}  // namespace satedge
