#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "satedge/convex_bandwidth.hpp"
#include "satedge/cost_model.hpp"
#include "satedge/dual_ascent.hpp"
#include "satedge/hybrid_ddqn.hpp"
#include "satedge/outcome.hpp"

namespace satedge {

enum class XSolverKind { Hybrid, Classical, Exhaustive };

std::string to_string(XSolverKind k);

struct AdmmSettings {
  double rho = 1e-5;             // J/MHz^2
  int max_iters = 200;
  double primal_tol = 1e-7;      // ||B - xi|| <= primal_tol ||B||
  double dual_tol = 1e-7;        // ||xi - xi_prev|| <= dual_tol ||xi||
  double epsilon_rel = 1e-9;     // descent slack, relative to |L|
  XSolverKind x_solver = XSolverKind::Exhaustive;
  CandidatePlan candidate_plan = CandidatePlan::LookaheadEnergy;
  int lookahead_steps = 3;       // scoring horizon of LookaheadEnergy
  AscentSchedule ascent{0.1, 20};
  BarrierSettings barrier{};
  AgentSettings agent{};
  int first_episodes = 600;      // agent training at the first x-update
  int warm_episodes = 60;        // warm-started retraining afterwards
  int threads = 1;
};

struct IterateRow {
  int iter = 0;
  double lagrangian = 0.0;      // after the x, B and xi updates, before varpi
  double lagrangian_prev = 0.0; // same varpi, previous iterate
  double energy = 0.0;          // total energy at B
  double consensus = 0.0;       // ||B - xi||, Hz
  double xi_change = 0.0;       // Hz
  double dual_value = 0.0;      // best dual value of the x-update
  Assignment x;
  bool accepted = true;
  int retries = 0;
};

struct AdmmResult {
  Assignment x;
  BandwidthPlan plan;
  double energy = 0.0;
  ConstraintResiduals residuals;
  std::vector<IterateRow> log;
  bool converged = false;
  double final_dual = 0.0;
  double final_lagrangian = 0.0;
  std::uint64_t candidate_evaluations = 0;
};

/// Descent safeguard: accept iff L_new - L_old <= slack.
bool descent_check(double l_new, double l_old, double slack);

/// Strategy for the discrete update, given the evaluator of this iteration.
class XUpdater {
 public:
  struct Result {
    Assignment x;
    DualState dual;
    double dual_value = 0.0;
  };
  virtual ~XUpdater() = default;
  /// attempt 0 is the regular update; attempt 1 is the retry after a failed
  /// descent check.
  virtual Result update(CandidateEvaluator& eval, const DualState& d0, int attempt) = 0;
};

std::unique_ptr<XUpdater> make_x_updater(const AdmmSettings& settings, const Scenario& s, std::uint64_t seed);

/// Any assignment that admits a feasible bandwidth plan: enumeration in
/// index order when small enough, otherwise a spread heuristic.
Outcome<Assignment> find_feasible_assignment(const Scenario& s, const BarrierSettings& barrier = {});

/// The splitting loop: x-update, B-update, xi-update, descent check, varpi
/// update, until consensus and xi stabilize with x unchanged.
Outcome<AdmmResult> run_admm(const Scenario& s, const AdmmSettings& settings, std::uint64_t seed);

/// Same loop driven by a caller-provided x-updater.
Outcome<AdmmResult> run_admm(const Scenario& s, const AdmmSettings& settings, XUpdater& updater);

/// Starting plan: every entry at the equal share, xi = B, varpi = 0.
BandwidthPlan initial_plan(const Scenario& s);

}  // namespace satedge
