#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kron_oracle.hpp"
#include "satedge/vqc.hpp"

using namespace satedge;

namespace {

using kron_oracle::kPi;

Eigen::VectorXd random_vec(int n, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("vqc") {
  TEST_CASE("state matches dense Kronecker products") {
    std::mt19937_64 rng(1);
    for (int n = 1; n <= 4; ++n) {
      for (bool ent : {true, false}) {
        CircuitSpec spec{n, 2, n, ent};
        const Eigen::VectorXd angles = random_vec(spec.n_angles(), rng, kPi);
        const Eigen::VectorXd params = random_vec(spec.n_params(), rng, kPi);
        const StateVector psi = run_state(spec, angles, params);

        const Eigen::VectorXcd ref = kron_oracle::run(build_circuit(spec, angles, params), n);

        double err = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) err = std::max(err, std::abs(psi[i] - ref[Eigen::Index(i)]));
        CAPTURE(n);
        CHECK(err <= 1e-10);

        const Eigen::VectorXd z = run(spec, angles, params);
        for (int q = 0; q < n; ++q) {
          double zq = 0.0;
          for (Eigen::Index b = 0; b < ref.size(); ++b) zq += std::norm(ref[b]) * (((b >> q) & 1) ? -1.0 : 1.0);
          CHECK(std::abs(z[q] - zq) <= 1e-10);
        }
      }
    }
  }

  TEST_CASE("parameter shift matches finite differences and the adjoint sweep") {
    std::mt19937_64 rng(2);
    CircuitSpec spec{4, 2, 3, true};
    const Eigen::VectorXd angles = random_vec(spec.n_angles(), rng, kPi);
    const Eigen::VectorXd params = random_vec(spec.n_params(), rng, kPi);
    const Eigen::MatrixXd ps = parameter_shift_grad(spec, angles, params);
    REQUIRE(ps.rows() == 3);
    REQUIRE(ps.cols() == spec.n_params());

    const double h = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < spec.n_params(); ++k) {
      Eigen::VectorXd a = params, b = params;
      a[k] += h;
      b[k] -= h;
      const Eigen::VectorXd fd = (run(spec, angles, a) - run(spec, angles, b)) / (2 * h);
      worst = std::max(worst, (fd - ps.col(k)).cwiseAbs().maxCoeff());
    }
    CHECK(worst <= 1e-6);

    const Eigen::VectorXd w = random_vec(3, rng, 1.0);
    const VqcVjp adj = adjoint_vjp(spec, angles, params, w);
    CHECK((adj.d_params - ps.transpose() * w).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((adj.z - run(spec, angles, params)).cwiseAbs().maxCoeff() <= 1e-14);

    double worst_a = 0.0;
    for (int k = 0; k < spec.n_angles(); ++k) {
      Eigen::VectorXd a = angles, b = angles;
      a[k] += h;
      b[k] -= h;
      const double fd = w.dot(run(spec, a, params) - run(spec, b, params)) / (2 * h);
      worst_a = std::max(worst_a, std::abs(fd - adj.d_angles[k]));
    }
    CHECK(worst_a <= 1e-6);
  }

  TEST_CASE("norm drift over a long gate sequence") {
    std::mt19937_64 rng(3);
    const int n = 8;
    StateVector psi = zero_state(n);
    std::uniform_int_distribution<int> kind(0, 3), qubit(0, n - 1);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int i = 0; i < 1000; ++i) {
      const GateKind k = static_cast<GateKind>(kind(rng));
      GateOp g{k, qubit(rng)};
      if (k == GateKind::CNOT) g.q1 = (g.q0 + 1 + qubit(rng) % (n - 1)) % n;
      else g.angle = ang(rng);
      apply_gate(psi, g);
    }
    CHECK(std::abs(norm(psi) - 1.0) <= 1e-12);

    // Inverse gates undo the forward pass.
    StateVector phi = zero_state(3);
    const std::vector<GateOp> ops{{GateKind::RX, 0, -1, 0.3}, {GateKind::CNOT, 0, 2}, {GateKind::RZ, 2, -1, 1.1}};
    for (const auto& g : ops) apply_gate(phi, g);
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) apply_gate_inverse(phi, *it);
    CHECK(std::abs(phi[0] - Amplitude(1.0)) <= 1e-14);
  }

  TEST_CASE("gate examples") {
    StateVector psi = zero_state(2);
    CHECK(expectation_z(psi, 0) == 1.0);
    apply_gate(psi, {GateKind::RX, 0, -1, kPi});
    CHECK(expectation_z(psi, 0) == doctest::Approx(-1.0));
    apply_gate(psi, {GateKind::CNOT, 0, 1});
    CHECK(expectation_z(psi, 1) == doctest::Approx(-1.0));

    StateVector h = zero_state(1);
    apply_gate(h, {GateKind::RY, 0, -1, kPi / 2});
    CHECK(std::abs(expectation_z(h, 0)) <= 1e-15);
    apply_gate(h, {GateKind::RZ, 0, -1, 0.7});
    CHECK(std::abs(expectation_z(h, 0)) <= 1e-15);

    CircuitSpec spec{8, 2, 4, true};
    CHECK(spec.n_params() == 48);
    CHECK(run(spec, Eigen::VectorXd::Zero(16), Eigen::VectorXd::Zero(48)).isApproxToConstant(1.0, 1e-15));
  }
}
