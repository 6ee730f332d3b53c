#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace satedge {

/// Server choice per UE. Storing one index per row makes the binary and
/// one-server-per-UE requirements hold by construction; x(n, j) recovers
/// the matrix view.
struct Assignment {
  std::vector<int> server;

  Assignment() = default;
  explicit Assignment(std::vector<int> s) : server(std::move(s)) {}

  int n_ues() const { return static_cast<int>(server.size()); }
  bool x(int n, int j) const { return server[n] == j; }
  /// Number of UEs placed on server j.
  int load(int j) const;

  /// Base-J number with UE 0 as the most significant digit, so increasing
  /// index is lexicographic order.
  std::uint64_t index(int n_servers) const;
  static Assignment from_index(std::uint64_t idx, int n_ues, int n_servers);

  std::string to_string() const;

  bool operator==(const Assignment&) const = default;
};

/// Count of assignments J^N, or 0 when it overflows 64 bits.
std::uint64_t assignment_count(int n_ues, int n_servers);

/// Bandwidths in Hz. b_s has one column per satellite. xi and varpi are
/// flattened as row-major b_access followed by row-major b_s.
struct BandwidthPlan {
  Eigen::MatrixXd b_access;  // N x J
  Eigen::MatrixXd b_s;       // N x (J-1)
  Eigen::VectorXd xi;        // N(2J-1)
  Eigen::VectorXd varpi;     // N(2J-1)

  static BandwidthPlan zeros(int n_ues, int n_servers);

  int n_ues() const { return static_cast<int>(b_access.rows()); }
  int n_servers() const { return static_cast<int>(b_access.cols()); }
  Eigen::Index flat_size() const { return b_access.size() + b_s.size(); }

  Eigen::Index access_slot(int n, int j) const { return static_cast<Eigen::Index>(n) * n_servers() + j; }
  Eigen::Index backhaul_slot(int n, int j) const {
    return b_access.size() + static_cast<Eigen::Index>(n) * (n_servers() - 1) + j;
  }

  Eigen::VectorXd flat_b() const;
  void set_flat_b(const Eigen::VectorXd& v);

  /// Access bandwidths as seen through xi, same shape as b_access.
  Eigen::MatrixXd xi_access() const;
};

}  // namespace satedge
