#include "satedge/channel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace satedge {

double path_gain(double f_cf, double d) {
  if (!(f_cf > 0.0)) throw std::domain_error("path_gain: carrier frequency must be positive");
  if (!(d > 0.0)) throw std::domain_error("path_gain: distance must be positive");
  const double a = kSpeedOfLight / (4.0 * std::numbers::pi * f_cf);
  return a * a / (d * d);
}

double shannon_rate(double bandwidth_hz, double c_hz) {
  if (!(bandwidth_hz > 0.0)) return 0.0;
  return bandwidth_hz * std::log1p(c_hz / bandwidth_hz) / std::numbers::ln2;
}

LinkGains link_gains(const Scenario& s) {
  LinkGains g;
  g.h_access.reserve(s.n_ues());
  for (int n = 0; n < s.n_ues(); ++n) g.h_access.push_back(path_gain(s.radio.f_cf_access_hz, s.topology.d_ue_bs_m[n]));
  g.d_sat = s.topology.sat_altitude_m;
  g.h_sat = path_gain(s.radio.f_cf_backhaul_hz, g.d_sat);
  return g;
}

LinkModel::LinkModel(const Scenario& s) : s_(&s), gains_(link_gains(s)) {
  const auto& r = s.radio;
  const double ga = r.g_ue_tx() * r.g_bs_rx() / r.noise_psd_access();
  const double gb = r.g_bs_tx() * r.g_sat_rx() * gains_.h_sat / r.noise_psd_backhaul();
  for (int n = 0; n < s.n_ues(); ++n) {
    access_c_.push_back(ga * r.p_ue_w(n) * gains_.h_access[n]);
    backhaul_c_.push_back(gb * r.p_bs_w(n));
  }
}

int LinkModel::hops(int j) const { return std::abs(j - s_->topology.gateway_sat_index); }

double LinkModel::sat_fixed_latency(int n, int j) const {
  const auto& t = s_->topology;
  const double h = hops(j);
  return gains_.d_sat / kSpeedOfLight + t.task_bits[n] / t.isl_rate_bps * h + t.isl_hop_delay_s * h;
}

namespace {

double latency(double bits, double rate) {
  if (bits == 0.0) return 0.0;
  if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
  return bits / rate;
}

}  // namespace

double access_rate(int n, const Assignment& x, const Eigen::MatrixXd& b_access, const Scenario& s) {
  const LinkModel link(s);
  double r = 0.0;
  for (int j = 0; j < s.n_servers(); ++j)
    if (x.x(n, j)) r += shannon_rate(b_access(n, j), link.access_c(n));
  return r;
}

double access_latency(int n, const Assignment& x, const Eigen::MatrixXd& b_access, const Scenario& s) {
  return latency(s.topology.task_bits[n], access_rate(n, x, b_access, s));
}

double backhaul_rate(int n, const Assignment& x, const Eigen::MatrixXd& b_s, const Scenario& s) {
  const LinkModel link(s);
  double r = 0.0;
  for (int j = 0; j < s.n_sats(); ++j)
    if (x.x(n, j)) r += shannon_rate(b_s(n, j), link.backhaul_c(n));
  return r;
}

double sat_total_latency(int n, int j, const Assignment& x, const Eigen::MatrixXd& b_access,
                         const Eigen::MatrixXd& b_s, const Scenario& s) {
  const LinkModel link(s);
  const double bits = s.topology.task_bits[n];
  return access_latency(n, x, b_access, s) + latency(bits, backhaul_rate(n, x, b_s, s)) +
         link.sat_fixed_latency(n, j);
}

}  // namespace satedge
