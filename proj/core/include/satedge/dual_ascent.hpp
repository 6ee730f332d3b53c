#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "satedge/convex_bandwidth.hpp"
#include "satedge/plan.hpp"
#include "satedge/scenario.hpp"

namespace satedge {

/// Multipliers of the relaxed problem. Each product with its raw residual
/// is in Joules: lambda (per UE, free) and lambda_bar (J/s) for the
/// one-server and latency rows, phi and psi (J/Hz) for the band totals,
/// mu (J/J) for the satellite energy budgets.
struct DualState {
  Eigen::VectorXd lambda;
  Eigen::VectorXd lambda_bar;
  double phi = 0.0;
  double psi = 0.0;
  Eigen::VectorXd mu;

  static DualState zeros(const Scenario& s);
  bool valid() const;
};

/// How a candidate assignment is given a bandwidth plan before it is scored.
enum class CandidatePlan {
  Frozen,      // the current plan as is
  EqualSplit,  // equal split, no splitting penalty
  Lookahead,   // the candidate's own B and xi updates from the current plan
  LookaheadEnergy,  // same plan, scored by the energy at B instead of the penalized value
};

/// Multiplier-independent facts about one candidate.
struct CandidateScore {
  bool feasible = false;    // false: no plan exists, objective is the sentinel
  double objective = 0.0;   // J
  double violation = 0.0;   // worst scaled violation when infeasible
  Eigen::VectorXd assignment_res;
  Eigen::VectorXd latency_res;  // s
  double access_res = 0.0;      // Hz
  double backhaul_res = 0.0;    // Hz
  Eigen::VectorXd energy_res;   // J
  BandwidthPlan plan;
};

/// Scores candidates against a fixed (scenario, plan) pair and caches the
/// result by assignment index, so repeated dual evaluations only recombine
/// cached residuals.
class CandidateEvaluator {
 public:
  CandidateEvaluator(const Scenario& s, BandwidthPlan plan, CandidatePlan mode, double rho,
                     BarrierSettings barrier = {}, int lookahead_steps = 1);

  const CandidateScore& score(const Assignment& x);
  /// Scores every assignment; work is split by index range over `threads`.
  void prefetch_all(int threads);

  /// Per-scenario reward scale: |value| of the all-on-BS assignment when it
  /// is feasible, otherwise 1 J.
  double normalizer();
  double sentinel(double violation);

  /// Relaxed Lagrangian of x under multipliers d.
  double lagrangian(const Assignment& x, const DualState& d);

  const Scenario& scenario() const { return *s_; }
  const BandwidthPlan& plan() const { return plan_; }
  CandidatePlan mode() const { return mode_; }
  double rho() const { return rho_; }
  std::uint64_t evaluations() const { return evaluations_; }

 private:
  // Thread-safe; leaves `objective` unset for infeasible candidates.
  CandidateScore compute(const Assignment& x) const;
  void finish(CandidateScore& c);

  const Scenario* s_;
  BandwidthPlan plan_;
  CandidatePlan mode_;
  double rho_;
  BarrierSettings barrier_;
  int steps_;
  std::unordered_map<std::uint64_t, CandidateScore> cache_;
  std::optional<double> normalizer_;
  std::uint64_t evaluations_ = 0;
};

/// An inner minimizer over assignments for given multipliers.
class XMinimizer {
 public:
  virtual ~XMinimizer() = default;
  virtual Assignment minimize(CandidateEvaluator& eval, const DualState& d) = 0;
};

/// Full enumeration; ties go to the lowest assignment index.
class ExhaustiveMinimizer : public XMinimizer {
 public:
  explicit ExhaustiveMinimizer(int threads = 1) : threads_(threads) {}
  Assignment minimize(CandidateEvaluator& eval, const DualState& d) override;

 private:
  int threads_;
};

struct DualValue {
  double value = 0.0;
  Assignment x_min;
};

DualValue eval_dual(const DualState& d, XMinimizer& minimizer, CandidateEvaluator& eval);

struct AscentSchedule {
  double alpha0 = 0.1;
  int iters = 200;
};

struct AscentTraceRow {
  int iter = 0;
  double dual_value = 0.0;
  double best_value = 0.0;
  double latency_res_norm = 0.0;  // s
  double band_res_norm = 0.0;     // Hz
  double energy_res_norm = 0.0;   // J
};

struct AscentResult {
  DualState best;
  double best_value = 0.0;
  Assignment best_x;
  DualState last;
  std::vector<AscentTraceRow> trace;
};

/// One projected subgradient step on d at the residuals of x_min.
DualState ascent_step(const DualState& d, const CandidateScore& at, const Scenario& s, double alpha, double e_ref);

/// Projected subgradient ascent with step alpha0 / sqrt(1 + t), each family
/// scaled by its natural unit. The best iterate is tracked.
AscentResult ascend(const DualState& d0, const AscentSchedule& schedule, XMinimizer& minimizer,
                    CandidateEvaluator& eval);

struct DualityGap {
  double gap = 0.0;
  double relative = 0.0;
  bool weak_duality_violated = false;
};

DualityGap duality_gap(double primal_value, double dual_value, double tol = 1e-9);

}  // namespace satedge
