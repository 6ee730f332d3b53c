#include "satedge/vqc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace satedge {

namespace {

using C = Amplitude;
constexpr C kI{0.0, 1.0};

template <class F>
void for_pairs(StateVector& psi, int q, F&& f) {
  const std::size_t bit = std::size_t{1} << q;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (!(i & bit)) f(psi[i], psi[i | bit]);
}

void rotate(StateVector& psi, GateKind kind, int q, double theta) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  switch (kind) {
    case GateKind::RX:
      for_pairs(psi, q, [&](C& a, C& b) {
        const C a0 = a;
        a = c * a0 - kI * s * b;
        b = -kI * s * a0 + c * b;
      });
      break;
    case GateKind::RY:
      for_pairs(psi, q, [&](C& a, C& b) {
        const C a0 = a;
        a = c * a0 - s * b;
        b = s * a0 + c * b;
      });
      break;
    case GateKind::RZ: {
      const C e0{c, -s};
      const C e1{c, s};
      for_pairs(psi, q, [&](C& a, C& b) {
        a *= e0;
        b *= e1;
      });
      break;
    }
    case GateKind::CNOT:
      throw std::logic_error("rotate: CNOT is not a rotation");
  }
}

void cnot(StateVector& psi, int control, int target) {
  const std::size_t cb = std::size_t{1} << control;
  const std::size_t tb = std::size_t{1} << target;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if ((i & cb) && !(i & tb)) std::swap(psi[i], psi[i | tb]);
}

// G psi for the generator of a rotation gate.
StateVector apply_generator(const StateVector& psi, const GateOp& g) {
  StateVector out = psi;
  switch (g.kind) {
    case GateKind::RX:
      for_pairs(out, g.q0, [](C& a, C& b) { std::swap(a, b); });
      break;
    case GateKind::RY:
      for_pairs(out, g.q0, [](C& a, C& b) {
        const C a0 = a;
        a = -kI * b;
        b = kI * a0;
      });
      break;
    case GateKind::RZ:
      for_pairs(out, g.q0, [](C&, C& b) { b = -b; });
      break;
    case GateKind::CNOT:
      throw std::logic_error("apply_generator: CNOT has no parameter");
  }
  return out;
}

}  // namespace

StateVector zero_state(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 24) throw std::invalid_argument("zero_state: qubit count out of range");
  StateVector psi(std::size_t{1} << n_qubits, C{0.0, 0.0});
  psi[0] = 1.0;
  return psi;
}

void apply_gate(StateVector& psi, const GateOp& g) {
  if (g.kind == GateKind::CNOT) {
    cnot(psi, g.q0, g.q1);
  } else {
    rotate(psi, g.kind, g.q0, g.angle);
  }
}

void apply_gate_inverse(StateVector& psi, const GateOp& g) {
  if (g.kind == GateKind::CNOT) {
    cnot(psi, g.q0, g.q1);
  } else {
    rotate(psi, g.kind, g.q0, -g.angle);
  }
}

double expectation_z(const StateVector& psi, int q) {
  const std::size_t bit = std::size_t{1} << q;
  double z = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) z += (i & bit ? -1.0 : 1.0) * std::norm(psi[i]);
  return z;
}

double norm(const StateVector& psi) {
  double n = 0.0;
  for (const C& a : psi) n += std::norm(a);
  return std::sqrt(n);
}

std::vector<GateOp> build_circuit(const CircuitSpec& spec, const Eigen::VectorXd& angles,
                                  const Eigen::VectorXd& params) {
  const int n = spec.n_qubits;
  if (angles.size() != spec.n_angles()) throw std::invalid_argument("build_circuit: angle count mismatch");
  if (params.size() != spec.n_params()) throw std::invalid_argument("build_circuit: parameter count mismatch");
  if (spec.n_readout > n) throw std::invalid_argument("build_circuit: more readouts than qubits");
  std::vector<GateOp> ops;
  for (int q = 0; q < n; ++q) {
    ops.push_back({GateKind::RX, q, -1, angles[q], -(1 + q)});
    ops.push_back({GateKind::RZ, q, -1, angles[n + q], -(1 + n + q)});
  }
  for (int l = 0; l < spec.n_layers; ++l) {
    for (int q = 0; q < n; ++q) {
      const int base = 3 * (l * n + q);
      ops.push_back({GateKind::RZ, q, -1, params[base], base});
      ops.push_back({GateKind::RY, q, -1, params[base + 1], base + 1});
      ops.push_back({GateKind::RZ, q, -1, params[base + 2], base + 2});
    }
    if (spec.entangle && n > 1)
      for (int q = 0; q < n; ++q) ops.push_back({GateKind::CNOT, q, (q + 1) % n});
  }
  return ops;
}

StateVector run_state(const CircuitSpec& spec, const Eigen::VectorXd& angles, const Eigen::VectorXd& params) {
  StateVector psi = zero_state(spec.n_qubits);
  for (const GateOp& g : build_circuit(spec, angles, params)) apply_gate(psi, g);
  return psi;
}

Eigen::VectorXd run(const CircuitSpec& spec, const Eigen::VectorXd& angles, const Eigen::VectorXd& params) {
  const StateVector psi = run_state(spec, angles, params);
  Eigen::VectorXd z(spec.n_readout);
  for (int q = 0; q < spec.n_readout; ++q) z[q] = expectation_z(psi, q);
  return z;
}

Eigen::MatrixXd parameter_shift_grad(const CircuitSpec& spec, const Eigen::VectorXd& angles,
                                     const Eigen::VectorXd& params) {
  Eigen::MatrixXd jac(spec.n_readout, spec.n_params());
  const double shift = 0.5 * std::numbers::pi;
  for (int k = 0; k < spec.n_params(); ++k) {
    Eigen::VectorXd p = params;
    p[k] += shift;
    const Eigen::VectorXd plus = run(spec, angles, p);
    p[k] = params[k] - shift;
    const Eigen::VectorXd minus = run(spec, angles, p);
    jac.col(k) = 0.5 * (plus - minus);
  }
  return jac;
}

VqcVjp adjoint_vjp(const CircuitSpec& spec, const Eigen::VectorXd& angles, const Eigen::VectorXd& params,
                   const Eigen::VectorXd& w) {
  if (w.size() != spec.n_readout) throw std::invalid_argument("adjoint_vjp: weight count mismatch");
  const std::vector<GateOp> ops = build_circuit(spec, angles, params);
  StateVector phi = zero_state(spec.n_qubits);
  for (const GateOp& g : ops) apply_gate(phi, g);

  VqcVjp out;
  out.z.resize(spec.n_readout);
  for (int q = 0; q < spec.n_readout; ++q) out.z[q] = expectation_z(phi, q);
  out.d_params = Eigen::VectorXd::Zero(spec.n_params());
  out.d_angles = Eigen::VectorXd::Zero(spec.n_angles());

  StateVector lam = phi;
  for (std::size_t i = 0; i < lam.size(); ++i) {
    double o = 0.0;
    for (int q = 0; q < spec.n_readout; ++q) o += (i >> q & 1U) ? -w[q] : w[q];
    lam[i] *= o;
  }
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const GateOp& g = *it;
    if (g.kind != GateKind::CNOT) {
      const StateVector gphi = apply_generator(phi, g);
      C inner{0.0, 0.0};
      for (std::size_t i = 0; i < phi.size(); ++i) inner += std::conj(lam[i]) * gphi[i];
      if (g.param >= 0) {
        out.d_params[g.param] += inner.imag();
      } else {
        out.d_angles[-(g.param + 1)] += inner.imag();
      }
    }
    apply_gate_inverse(phi, g);
    apply_gate_inverse(lam, g);
  }
  return out;
}

}  // namespace satedge
