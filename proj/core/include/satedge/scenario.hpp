#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace satedge {

/// Antenna gains and transmit powers are kept in the dB units they are
/// specified in; linear values are derived on demand so a document
/// round-trips bit-exactly.
struct RadioParams {
  double g_ue_tx_dbi = 4.0;
  double g_bs_rx_dbi = 15.0;
  double g_bs_tx_dbi = 38.0;
  double g_sat_rx_dbi = 38.0;
  std::vector<double> p_ue_dbm;  // per UE
  std::vector<double> p_bs_dbm;  // per UE data stream on the backhaul
  double f_cf_access_hz = 28e9;
  double f_cf_backhaul_hz = 30e9;
  double noise_psd_access_dbm_per_hz = -174.0;
  double noise_psd_backhaul_dbm_per_hz = -174.0;
  double b_access_total_hz = 50e6;
  double b_s_total_hz = 100e6;

  double g_ue_tx() const;
  double g_bs_rx() const;
  double g_bs_tx() const;
  double g_sat_rx() const;
  double p_ue_w(int n) const;
  double p_bs_w(int n) const;
  double noise_psd_access() const;    // W/Hz
  double noise_psd_backhaul() const;  // W/Hz

  bool operator==(const RadioParams&) const = default;
};

struct ComputeParams {
  std::vector<double> kappa;     // CPU cycles per bit, per UE
  std::vector<double> eta_terr;  // effective switched capacitance at the BS, per UE
  std::vector<double> eta_sat;   // effective switched capacitance at a satellite, per UE
  double f_terr_hz = 3e9;
  std::vector<double> f_sat_hz;  // per satellite
  std::vector<double> e_th_j;    // per-satellite energy budget
  double t_th_s = 0.105;

  bool operator==(const ComputeParams&) const = default;
};

struct TopologyParams {
  int n_ues = 4;
  int n_sats = 3;
  std::vector<double> d_ue_bs_m;
  double d_min_m = 100.0;  // distance sampling interval
  double d_max_m = 400.0;
  double sat_altitude_m = 600e3;
  int gateway_sat_index = 1;
  double isl_rate_bps = 10e9;
  double isl_hop_delay_s = 1.46e-3;
  std::vector<double> task_bits;

  bool operator==(const TopologyParams&) const = default;
};

/// A complete network instance. Server index j < n_sats is a satellite;
/// j == n_sats is the terrestrial base station.
struct Scenario {
  RadioParams radio;
  ComputeParams compute;
  TopologyParams topology;
  std::uint64_t seed = 0;

  int n_ues() const { return topology.n_ues; }
  int n_sats() const { return topology.n_sats; }
  int n_servers() const { return topology.n_sats + 1; }
  int bs_index() const { return topology.n_sats; }

  bool operator==(const Scenario&) const = default;
};

inline constexpr int kScenarioSchemaVersion = 1;

/// Dotted key -> JSON literal, e.g. {"compute.t_th_s", "0.2"} or
/// {"topology.task_bits", "[5e5, 6e5, 5e5, 5e5]"}. A scalar given for a
/// per-UE or per-satellite array is broadcast to every entry.
using Overrides = std::map<std::string, std::string>;

/// Reference parameter set with UE distances drawn uniformly on [d_min, d_max].
/// Pure function of (seed, overrides). Throws ConfigError on unknown keys.
Scenario generate_scenario(std::uint64_t seed, const Overrides& overrides = {});

/// Returns a human-readable list of violated invariants; empty when valid.
std::vector<std::string> validate(const Scenario& s);

std::string to_document(const Scenario& s);
/// Throws ConfigError with line/column or field diagnostics.
Scenario from_document(const std::string& text);

void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace satedge
