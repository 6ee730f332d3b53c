#include "satedge/plan.hpp"

#include <sstream>
#include <stdexcept>

namespace satedge {

int Assignment::load(int j) const {
  int c = 0;
  for (int s : server) c += (s == j);
  return c;
}

std::uint64_t Assignment::index(int n_servers) const {
  std::uint64_t idx = 0;
  for (int s : server) idx = idx * static_cast<std::uint64_t>(n_servers) + static_cast<std::uint64_t>(s);
  return idx;
}

Assignment Assignment::from_index(std::uint64_t idx, int n_ues, int n_servers) {
  Assignment a;
  a.server.assign(n_ues, 0);
  for (int n = n_ues - 1; n >= 0; --n) {
    a.server[n] = static_cast<int>(idx % static_cast<std::uint64_t>(n_servers));
    idx /= static_cast<std::uint64_t>(n_servers);
  }
  return a;
}

std::string Assignment::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < server.size(); ++i) os << (i ? " " : "") << server[i];
  os << ']';
  return os.str();
}

std::uint64_t assignment_count(int n_ues, int n_servers) {
  std::uint64_t c = 1;
  for (int n = 0; n < n_ues; ++n) {
    if (c > UINT64_MAX / static_cast<std::uint64_t>(n_servers)) return 0;
    c *= static_cast<std::uint64_t>(n_servers);
  }
  return c;
}

BandwidthPlan BandwidthPlan::zeros(int n_ues, int n_servers) {
  BandwidthPlan p;
  p.b_access = Eigen::MatrixXd::Zero(n_ues, n_servers);
  p.b_s = Eigen::MatrixXd::Zero(n_ues, n_servers - 1);
  p.xi = Eigen::VectorXd::Zero(p.flat_size());
  p.varpi = Eigen::VectorXd::Zero(p.flat_size());
  return p;
}

Eigen::VectorXd BandwidthPlan::flat_b() const {
  Eigen::VectorXd v(flat_size());
  Eigen::Index k = 0;
  for (Eigen::Index n = 0; n < b_access.rows(); ++n)
    for (Eigen::Index j = 0; j < b_access.cols(); ++j) v[k++] = b_access(n, j);
  for (Eigen::Index n = 0; n < b_s.rows(); ++n)
    for (Eigen::Index j = 0; j < b_s.cols(); ++j) v[k++] = b_s(n, j);
  return v;
}

void BandwidthPlan::set_flat_b(const Eigen::VectorXd& v) {
  if (v.size() != flat_size()) throw std::invalid_argument("BandwidthPlan::set_flat_b: size mismatch");
  Eigen::Index k = 0;
  for (Eigen::Index n = 0; n < b_access.rows(); ++n)
    for (Eigen::Index j = 0; j < b_access.cols(); ++j) b_access(n, j) = v[k++];
  for (Eigen::Index n = 0; n < b_s.rows(); ++n)
    for (Eigen::Index j = 0; j < b_s.cols(); ++j) b_s(n, j) = v[k++];
}

Eigen::MatrixXd BandwidthPlan::xi_access() const {
  Eigen::MatrixXd m(b_access.rows(), b_access.cols());
  Eigen::Index k = 0;
  for (Eigen::Index n = 0; n < m.rows(); ++n)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(n, j) = xi[k++];
  return m;
}

}  // namespace satedge
