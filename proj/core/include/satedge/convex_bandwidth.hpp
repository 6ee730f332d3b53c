#pragma once

#include "satedge/outcome.hpp"
#include "satedge/plan.hpp"
#include "satedge/scenario.hpp"

namespace satedge {

/// Log-barrier interior-point settings. The outer loop stops once the
/// barrier duality gap m/t falls below gap_tol times the objective scale.
struct BarrierSettings {
  double t0 = 1.0;
  double mu = 10.0;
  double newton_tol = 1e-8;   // Newton decrement lambda^2/2 per centering
  int max_newton_iters = 80;
  int outer_iters = 40;
  double gap_tol = 1e-12;     // relative to |objective|
  double floor_hz = 1.0;      // lower bound for active links
};

struct SolveStats {
  double objective = 0.0;       // J, barrier-free value of the solved problem
  double kkt_residual = 0.0;    // stationarity, relative to the objective gradient
  double complementarity = 0.0; // max |multiplier * scaled residual|
  int newton_iters = 0;
  int outer_iters = 0;
};

struct BUpdate {
  BandwidthPlan plan;
  SolveStats stats;
};

struct FixedAssignmentSolution {
  BandwidthPlan plan;
  double energy = 0.0;
  SolveStats stats;
};

/// Equal split of the access band over all N links and of the backhaul band
/// over the satellite-served UEs. When that violates a latency budget the
/// bandwidth is rebalanced by minimizing the worst scaled violation; the
/// assignment is infeasible when even that optimum is non-negative.
Outcome<BandwidthPlan> feasible_init(const Assignment& x, const Scenario& s,
                                     const BarrierSettings& settings = {});

/// Minimizes satellite-branch energy + rho/2 ||B - xi - varpi||^2 over the
/// latency and band-total constraints. Entries not used by x are set to
/// max(0, xi + varpi). rho is in J/MHz^2. Never returns a plan whose
/// objective is worse than the input's when the input is feasible.
Outcome<BUpdate> solve_B_subproblem(const Assignment& x, const BandwidthPlan& plan, const Scenario& s, double rho,
                                    const BarrierSettings& settings = {});

/// Coordinate-wise minimization of terrestrial uplink energy on xi plus the
/// penalty. Requires rho > 0.
BandwidthPlan solve_xi_subproblem(const Assignment& x, const BandwidthPlan& plan, const Scenario& s, double rho);

/// Scaled dual step varpi <- varpi - (B - xi).
BandwidthPlan update_varpi(const BandwidthPlan& plan);

/// Energy-optimal bandwidth for a fixed assignment (no splitting). The
/// returned plan has xi = B and varpi = 0.
Outcome<FixedAssignmentSolution> solve_given_assignment(const Assignment& x, const Scenario& s,
                                                        const BarrierSettings& settings = {});

/// One-dimensional xi solve used by solve_xi_subproblem, in MHz:
/// argmin_{v > 0} k / r(v) + rho/2 (v - target)^2 with r(v) = v log2(1 + c/v).
double xi_coordinate(double k, double c_mhz, double rho, double target_mhz);

/// Equal split used by feasible_init and the equal-bandwidth baseline;
/// entries not used by x are zero.
BandwidthPlan equal_split(const Assignment& x, const Scenario& s);

}  // namespace satedge
