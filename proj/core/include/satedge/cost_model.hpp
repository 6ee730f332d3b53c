#pragma once

#include <Eigen/Core>

#include "satedge/plan.hpp"
#include "satedge/scenario.hpp"

namespace satedge {

/// Penalty weights are quoted per MHz^2 so they stay O(1e-5..1e-3) J.
inline constexpr double kHzPerMHz = 1e6;

/// Terrestrial branch: uplink energy plus CPU energy at the BS, whose clock
/// is shared equally by the UEs it serves. `b_access` may be the B or the
/// xi view of the access bandwidths.
double terr_energy(int n, const Assignment& x, const Eigen::MatrixXd& b_access, const Scenario& s);

/// Satellite branch: uplink plus backhaul transmit energy. +inf when an
/// active rate is zero.
double sat_energy(int n, const Assignment& x, const BandwidthPlan& plan, const Scenario& s);

/// Satellite-branch energy plus terrestrial-branch energy. With
/// `use_xi_for_terr` the terrestrial uplink is evaluated on xi.
double total_energy(const Assignment& x, const BandwidthPlan& plan, const Scenario& s, bool use_xi_for_terr = false);

/// CPU time of UE n on its server, given how many tasks share it.
double compute_latency(int n, const Assignment& x, const Scenario& s);
/// Energy burned by satellite j's CPU; 0 for an idle satellite.
double sat_compute_energy(int j, const Assignment& x, const Scenario& s);

struct LatencyTotals {
  Eigen::MatrixXd sat;       // N x (J-1); NaN where the UE is not on that satellite
  Eigen::VectorXd terr;      // N; NaN for UEs not on the BS
  Eigen::VectorXd assigned;  // N; latency on the chosen server
};

LatencyTotals latency_totals(const Assignment& x, const BandwidthPlan& plan, const Scenario& s);

/// Each entry <= 0 means satisfied; equality rows are compared by |r|.
struct ConstraintResiduals {
  Eigen::VectorXd assignment;  // per UE: servers chosen - 1
  Eigen::VectorXd latency;     // per UE, s
  double access_total = 0.0;   // Hz
  double backhaul_total = 0.0; // Hz
  Eigen::VectorXd sat_energy;  // per satellite, J
  Eigen::VectorXd consensus;   // B - xi, Hz
  double min_bandwidth = 0.0;  // smallest B entry, Hz

  /// True when every inequality holds within `rel_tol` of its natural
  /// scale (T_th, band totals, E_th).
  bool feasible(const Scenario& s, double rel_tol) const;
};

ConstraintResiduals residuals(const Assignment& x, const BandwidthPlan& plan, const Scenario& s);

/// E_total(x, B, xi) + rho/2 ||B - xi - varpi||^2 with bandwidths in MHz
/// inside the penalty and rho in J/MHz^2.
double augmented_lagrangian(const Assignment& x, const BandwidthPlan& plan, const Scenario& s, double rho);

}  // namespace satedge
