#pragma once

#include <vector>

#include "satedge/plan.hpp"
#include "satedge/scenario.hpp"

namespace satedge {

inline constexpr double kSpeedOfLight = 3e8;

struct LinkGains {
  std::vector<double> h_access;  // UE n -> BS
  double h_sat = 0.0;            // BS -> gateway satellite
  double d_sat = 0.0;            // m
};

/// Free-space large-scale power gain (c / (4 pi f))^2 / d^2.
/// Throws std::domain_error unless f_cf > 0 and d > 0.
double path_gain(double f_cf, double d);

/// B * log2(1 + c / B) with the continuous extension 0 at B = 0, where
/// c = received power / noise PSD (Hz).
double shannon_rate(double bandwidth_hz, double c_hz);

LinkGains link_gains(const Scenario& s);

/// Per-link SNR numerators in Hz, so that rate = shannon_rate(B, c).
/// Construction costs a handful of pow() calls; solvers build one per run.
class LinkModel {
 public:
  explicit LinkModel(const Scenario& s);

  double access_c(int n) const { return access_c_[n]; }
  double backhaul_c(int n) const { return backhaul_c_[n]; }
  const LinkGains& gains() const { return gains_; }

  /// Hop count between satellite j and the gateway.
  int hops(int j) const;
  /// Bandwidth-independent transport latency of the satellite branch:
  /// propagation to orbit plus ISL forwarding.
  double sat_fixed_latency(int n, int j) const;

 private:
  const Scenario* s_;
  LinkGains gains_;
  std::vector<double> access_c_;
  std::vector<double> backhaul_c_;
};

double access_rate(int n, const Assignment& x, const Eigen::MatrixXd& b_access, const Scenario& s);
/// I_n / rate, +inf when no access bandwidth is active.
double access_latency(int n, const Assignment& x, const Eigen::MatrixXd& b_access, const Scenario& s);
double backhaul_rate(int n, const Assignment& x, const Eigen::MatrixXd& b_s, const Scenario& s);
/// Transmission part of the satellite branch latency for UE n served by
/// satellite j (compute latency excluded).
double sat_total_latency(int n, int j, const Assignment& x, const Eigen::MatrixXd& b_access,
                         const Eigen::MatrixXd& b_s, const Scenario& s);

}  // namespace satedge
