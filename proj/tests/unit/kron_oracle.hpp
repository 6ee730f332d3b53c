#pragma once

// Dense reference for the statevector simulator: each gate becomes a full
// 2^n matrix built from Kronecker products.

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "satedge/vqc.hpp"

namespace kron_oracle {

using satedge::Amplitude;
using satedge::GateKind;
using satedge::GateOp;

using CMat = Eigen::MatrixXcd;
inline constexpr double kPi = std::numbers::pi;

inline CMat single(GateKind k, double a) {
  const double c = std::cos(a / 2), s = std::sin(a / 2);
  const Amplitude i(0.0, 1.0);
  CMat u(2, 2);
  switch (k) {
    case GateKind::RX: u << c, -i * s, -i * s, c; break;
    case GateKind::RY: u << c, -s, s, c; break;
    case GateKind::RZ: u << std::exp(-i * (a / 2)), 0.0, 0.0, std::exp(i * (a / 2)); break;
    default: break;
  }
  return u;
}

inline CMat kron(const CMat& a, const CMat& b) {
  CMat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) k.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
  return k;
}

// Full 2^n unitary; qubit q is bit q, so the leftmost factor is the top qubit.
inline CMat full(const GateOp& g, int n) {
  const Eigen::Index dim = Eigen::Index(1) << n;
  if (g.kind == GateKind::CNOT) {
    CMat p = CMat::Zero(dim, dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
      const Eigen::Index to = ((b >> g.q0) & 1) ? b ^ (Eigen::Index(1) << g.q1) : b;
      p(to, b) = 1.0;
    }
    return p;
  }
  CMat m = CMat::Identity(1, 1);
  for (int q = n - 1; q >= 0; --q) m = kron(m, q == g.q0 ? single(g.kind, g.angle) : CMat::Identity(2, 2));
  return m;
}

// State after every gate of the circuit, starting from |0...0>.
inline Eigen::VectorXcd run(const std::vector<GateOp>& ops, int n) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index(1) << n);
  v[0] = 1.0;
  for (const GateOp& g : ops) v = full(g, n) * v;
  return v;
}

}  // namespace kron_oracle
