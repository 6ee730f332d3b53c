#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace satedge {

/// Angle encoding Rx(theta_q) Rz(phi_q) on every qubit, then `n_layers`
/// of Rot(a, b, c) = Rz(c) Ry(b) Rz(a) per qubit followed by a CNOT ring
/// q -> q+1 mod n. Readout is <Z_q> for q < n_readout.
struct CircuitSpec {
  int n_qubits = 8;
  int n_layers = 2;
  int n_readout = 4;
  bool entangle = true;

  int n_params() const { return 3 * n_qubits * n_layers; }
  int n_angles() const { return 2 * n_qubits; }
};

using Amplitude = std::complex<double>;
using StateVector = std::vector<Amplitude>;

enum class GateKind { RX, RY, RZ, CNOT };

/// Qubit q is bit q of the basis-state index.
struct GateOp {
  GateKind kind;
  int q0;         // target, or control for CNOT
  int q1 = -1;    // CNOT target
  double angle = 0.0;
  int param = -1; // index into params, or -(1 + angle index) for encodings
};

StateVector zero_state(int n_qubits);
void apply_gate(StateVector& psi, const GateOp& g);
/// Applies the inverse of g.
void apply_gate_inverse(StateVector& psi, const GateOp& g);
double expectation_z(const StateVector& psi, int q);
double norm(const StateVector& psi);

/// angles: [theta_0..theta_{n-1}, phi_0..phi_{n-1}].
std::vector<GateOp> build_circuit(const CircuitSpec& spec, const Eigen::VectorXd& angles,
                                  const Eigen::VectorXd& params);

StateVector run_state(const CircuitSpec& spec, const Eigen::VectorXd& angles, const Eigen::VectorXd& params);
Eigen::VectorXd run(const CircuitSpec& spec, const Eigen::VectorXd& angles, const Eigen::VectorXd& params);

/// Jacobian d<Z_q>/d params (n_readout x n_params) by the +-pi/2 shift rule.
Eigen::MatrixXd parameter_shift_grad(const CircuitSpec& spec, const Eigen::VectorXd& angles,
                                     const Eigen::VectorXd& params);

struct VqcVjp {
  Eigen::VectorXd z;        // forward expectations
  Eigen::VectorXd d_params;
  Eigen::VectorXd d_angles;
};

/// Gradient of sum_q w_q <Z_q> with respect to parameters and encoding
/// angles by adjoint differentiation (one forward, one backward sweep).
VqcVjp adjoint_vjp(const CircuitSpec& spec, const Eigen::VectorXd& angles, const Eigen::VectorXd& params,
                   const Eigen::VectorXd& w);

}  // namespace satedge
