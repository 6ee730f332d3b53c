#include "satedge/cost_model.hpp"

#include <cmath>
#include <limits>

#include "satedge/channel.hpp"

namespace satedge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double transmit_energy(double bits, double rate, double power) {
  if (bits == 0.0 || power == 0.0) return 0.0;
  if (!(rate > 0.0)) return kInf;
  return bits / rate * power;
}

}  // namespace

double compute_latency(int n, const Assignment& x, const Scenario& s) {
  const int j = x.server[n];
  const double cycles = s.topology.task_bits[n] * s.compute.kappa[n] * x.load(j);
  return j == s.bs_index() ? cycles / s.compute.f_terr_hz : cycles / s.compute.f_sat_hz[j];
}

double sat_compute_energy(int j, const Assignment& x, const Scenario& s) {
  const int load = x.load(j);
  if (load == 0) return 0.0;
  const double f = s.compute.f_sat_hz[j] / load;
  double e = 0.0;
  for (int n = 0; n < x.n_ues(); ++n)
    if (x.x(n, j)) e += s.compute.eta_sat[n] * s.topology.task_bits[n] * s.compute.kappa[n] * f * f;
  return e;
}

double terr_energy(int n, const Assignment& x, const Eigen::MatrixXd& b_access, const Scenario& s) {
  const double bits = s.topology.task_bits[n];
  const int bs = s.bs_index();
  const double up = transmit_energy(bits, access_rate(n, x, b_access, s), s.radio.p_ue_w(n));
  const int load = x.load(bs);
  if (load == 0) return up;
  const double f = s.compute.f_terr_hz / load;
  return up + s.compute.eta_terr[n] * bits * s.compute.kappa[n] * f * f;
}

double sat_energy(int n, const Assignment& x, const BandwidthPlan& plan, const Scenario& s) {
  const double bits = s.topology.task_bits[n];
  return transmit_energy(bits, access_rate(n, x, plan.b_access, s), s.radio.p_ue_w(n)) +
         transmit_energy(bits, backhaul_rate(n, x, plan.b_s, s), s.radio.p_bs_w(n));
}

double total_energy(const Assignment& x, const BandwidthPlan& plan, const Scenario& s, bool use_xi_for_terr) {
  const Eigen::MatrixXd xi_access = use_xi_for_terr ? plan.xi_access() : Eigen::MatrixXd();
  double e = 0.0;
  for (int n = 0; n < x.n_ues(); ++n) {
    if (x.server[n] == s.bs_index()) {
      e += terr_energy(n, x, use_xi_for_terr ? xi_access : plan.b_access, s);
    } else {
      e += sat_energy(n, x, plan, s);
    }
  }
  return e;
}

LatencyTotals latency_totals(const Assignment& x, const BandwidthPlan& plan, const Scenario& s) {
  const int n_ues = x.n_ues();
  LatencyTotals t;
  t.sat = Eigen::MatrixXd::Constant(n_ues, s.n_sats(), kNaN);
  t.terr = Eigen::VectorXd::Constant(n_ues, kNaN);
  t.assigned = Eigen::VectorXd::Zero(n_ues);
  for (int n = 0; n < n_ues; ++n) {
    const int j = x.server[n];
    if (j == s.bs_index()) {
      t.terr[n] = access_latency(n, x, plan.b_access, s) + compute_latency(n, x, s);
      t.assigned[n] = t.terr[n];
    } else {
      t.sat(n, j) = sat_total_latency(n, j, x, plan.b_access, plan.b_s, s) + compute_latency(n, x, s);
      t.assigned[n] = t.sat(n, j);
    }
  }
  return t;
}

ConstraintResiduals residuals(const Assignment& x, const BandwidthPlan& plan, const Scenario& s) {
  const int n_ues = x.n_ues();
  ConstraintResiduals r;
  r.assignment = Eigen::VectorXd::Zero(n_ues);
  for (int n = 0; n < n_ues; ++n) {
    int chosen = 0;
    for (int j = 0; j < s.n_servers(); ++j) chosen += x.x(n, j);
    r.assignment[n] = chosen - 1.0;
  }
  r.latency = latency_totals(x, plan, s).assigned.array() - s.compute.t_th_s;

  double access = 0.0;
  double backhaul = 0.0;
  for (int n = 0; n < n_ues; ++n) {
    const int j = x.server[n];
    access += plan.b_access(n, j);
    if (j != s.bs_index()) backhaul += plan.b_s(n, j);
  }
  r.access_total = access - s.radio.b_access_total_hz;
  r.backhaul_total = backhaul - s.radio.b_s_total_hz;

  r.sat_energy.resize(s.n_sats());
  for (int j = 0; j < s.n_sats(); ++j) r.sat_energy[j] = sat_compute_energy(j, x, s) - s.compute.e_th_j[j];

  r.consensus = plan.flat_b() - plan.xi;
  r.min_bandwidth = std::min(plan.b_access.minCoeff(), plan.b_s.size() ? plan.b_s.minCoeff() : 0.0);
  return r;
}

bool ConstraintResiduals::feasible(const Scenario& s, double rel_tol) const {
  if (assignment.size() && assignment.cwiseAbs().maxCoeff() > 0.0) return false;
  for (Eigen::Index n = 0; n < latency.size(); ++n)
    if (!(latency[n] <= rel_tol * s.compute.t_th_s)) return false;
  if (!(access_total <= rel_tol * s.radio.b_access_total_hz)) return false;
  if (!(backhaul_total <= rel_tol * s.radio.b_s_total_hz)) return false;
  for (Eigen::Index j = 0; j < sat_energy.size(); ++j)
    if (!(sat_energy[j] <= rel_tol * s.compute.e_th_j[j])) return false;
  return min_bandwidth >= 0.0;
}

double augmented_lagrangian(const Assignment& x, const BandwidthPlan& plan, const Scenario& s, double rho) {
  const Eigen::VectorXd d = (plan.flat_b() - plan.xi - plan.varpi) / kHzPerMHz;
  return total_energy(x, plan, s, true) + 0.5 * rho * d.squaredNorm();
}

}  // namespace satedge
