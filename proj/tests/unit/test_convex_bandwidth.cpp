#include <cmath>
#include <random>

#include "doctest.h"
#include "pg_oracle.hpp"
#include "satedge/convex_bandwidth.hpp"
#include "satedge/cost_model.hpp"

using namespace satedge;

namespace {

// Active bandwidths of x in oracle variable order, in MHz.
std::vector<double> active_mhz(const oracle::Problem& p, const Assignment& x, const BandwidthPlan& plan,
                               const Scenario& s) {
  std::vector<double> v;
  for (const oracle::Var& q : p.vars) {
    const int j = x.server[q.ue];
    v.push_back((q.access ? plan.b_access(q.ue, j) : plan.b_s(q.ue, j)) / 1e6);
  }
  (void)s;
  return v;
}

// Random assignment admitting a feasible plan.
Assignment random_feasible(const Scenario& s, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, s.n_servers() - 1);
  for (;;) {
    std::vector<int> srv(s.n_ues());
    for (int& j : srv) j = pick(rng);
    Assignment x(srv);
    if (feasible_init(x, s).ok()) return x;
  }
}

}  // namespace

TEST_SUITE("convex_bandwidth") {
  TEST_CASE("fixed-assignment optimum matches the projected-gradient oracle") {
    for (int inst = 0; inst < 20; ++inst) {
      CAPTURE(inst);
      std::mt19937_64 rng(1000 + inst);
      const Scenario s = generate_scenario(inst);
      const Assignment x = random_feasible(s, rng);
      CAPTURE(x.to_string());

      Outcome<FixedAssignmentSolution> sol = solve_given_assignment(x, s);
      REQUIRE(sol.ok());
      CHECK(sol->stats.kkt_residual <= 1e-8);
      CHECK(sol->energy == doctest::Approx(total_energy(x, sol->plan, s)).epsilon(1e-12));
      CHECK(residuals(x, sol->plan, s).feasible(s, 1e-9));

      const oracle::Problem p(x, s, true, 0.0);
      const oracle::Result ref = oracle::solve(p);
      CHECK(ref.max_violation <= 1e-9);
      const double ours = p.energy(active_mhz(p, x, sol->plan, s));
      CHECK(ours == doctest::Approx(sol->energy).epsilon(1e-12));
      CHECK(std::abs(ours - ref.energy) / ref.energy <= 1e-6);
    }
  }

  TEST_CASE("penalized B-update matches the oracle") {
    for (int inst = 0; inst < 5; ++inst) {
      CAPTURE(inst);
      std::mt19937_64 rng(77 + inst);
      const Scenario s = generate_scenario(inst);
      const Assignment x = random_feasible(s, rng);
      BandwidthPlan plan = *feasible_init(x, s);
      std::uniform_real_distribution<double> jitter(0.5, 1.5);
      plan.xi = plan.flat_b();
      for (Eigen::Index i = 0; i < plan.xi.size(); ++i) plan.xi[i] *= jitter(rng);
      plan.varpi.setZero();
      const double rho = 1e-5;

      Outcome<BUpdate> b = solve_B_subproblem(x, plan, s, rho);
      REQUIRE(b.ok());
      CHECK(b->stats.kkt_residual <= 1e-8);

      std::vector<double> targets(plan.xi.data(), plan.xi.data() + plan.xi.size());
      const oracle::Problem p(x, s, false, rho, &targets);
      const oracle::Result ref = oracle::solve(p);
      const double ours = p.energy(active_mhz(p, x, b->plan, s));
      CHECK(std::abs(ours - ref.energy) / std::abs(ref.energy) <= 1e-6);
    }
  }

  TEST_CASE("xi coordinate against a grid search") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      const double k = 1e-3 + 0.1 * u(rng);
      const double c = 1e3 + 1e5 * u(rng);
      const double rho = std::pow(10.0, -6.0 + 4.0 * u(rng));
      const double target = 1.0 + 40.0 * u(rng);
      auto f = [&](double v) { return k / oracle::rate(v, c) + 0.5 * rho * (v - target) * (v - target); };

      double lo = 1e-6, hi = 500.0, best = lo;
      for (int pass = 0; pass < 6; ++pass) {
        const int n = 2000;
        double fb = f(lo);
        best = lo;
        for (int i = 1; i <= n; ++i) {
          const double v = lo + (hi - lo) * i / n;
          if (f(v) < fb) {
            fb = f(v);
            best = v;
          }
        }
        const double w = (hi - lo) / n;
        lo = std::max(1e-9, best - w);
        hi = best + w;
      }
      CAPTURE(k);
      CAPTURE(c);
      CAPTURE(rho);
      CHECK(std::abs(xi_coordinate(k, c, rho, target) - best) <= 1e-6);  // 1 Hz
    }
  }

  TEST_CASE("varpi update") {
    BandwidthPlan p = BandwidthPlan::zeros(2, 2);
    p.b_access << 10.0, 0.0, 0.0, 4.0;
    p.b_s << 3.0, 0.0;
    p.xi = p.flat_b();
    p.xi[0] = 7.0;
    p.varpi.setConstant(1.0);
    const BandwidthPlan q = update_varpi(p);
    CHECK(q.varpi[0] == doctest::Approx(1.0 - 3.0));
    for (Eigen::Index i = 1; i < q.varpi.size(); ++i) CHECK(q.varpi[i] == doctest::Approx(1.0));
    CHECK(q.b_access == p.b_access);
    CHECK(q.xi == p.xi);
  }

  TEST_CASE("feasible_init") {
    const Scenario s = generate_scenario(0);
    const Assignment x({1, 0, 1, 2});
    Outcome<BandwidthPlan> p = feasible_init(x, s);
    REQUIRE(p.ok());
    CHECK(residuals(x, *p, s).feasible(s, 0.0));
    for (int n = 0; n < s.n_ues(); ++n)
      for (int j = 0; j < s.n_servers(); ++j)
        if (j != x.server[n]) CHECK(p->b_access(n, j) == 0.0);

    const Scenario tight = generate_scenario(0, {{"compute.t_th_s", "0.01"}});
    Outcome<BandwidthPlan> q = feasible_init(x, tight);
    REQUIRE_FALSE(q.ok());
    CHECK(q.infeasibility().constraint == "latency");
    CHECK(q.infeasibility().violation > 0.0);
  }

  TEST_CASE("B-update never increases the augmented Lagrangian") {
    for (int seed = 0; seed < 6; ++seed) {
      std::mt19937_64 rng(seed);
      const Scenario s = generate_scenario(seed);
      const Assignment x = random_feasible(s, rng);
      BandwidthPlan plan = *feasible_init(x, s);
      plan.xi = plan.flat_b() * 1.1;
      for (double rho : {1e-6, 1e-5, 1e-3}) {
        const double before = augmented_lagrangian(x, plan, s, rho);
        Outcome<BUpdate> b = solve_B_subproblem(x, plan, s, rho);
        REQUIRE(b.ok());
        CHECK(augmented_lagrangian(x, b->plan, s, rho) <= before + 1e-15 * std::abs(before));
      }
    }
  }

  TEST_CASE("huge rho pins B to xi + varpi") {
    const Scenario s = generate_scenario(3);
    std::mt19937_64 rng(3);
    const Assignment x = random_feasible(s, rng);
    BandwidthPlan plan = *feasible_init(x, s);
    plan.xi = plan.flat_b();
    plan.varpi.setZero();
    Outcome<BUpdate> b = solve_B_subproblem(x, plan, s, 1e12);
    REQUIRE(b.ok());
    const Eigen::VectorXd diff = b->plan.flat_b() - plan.xi;
    CHECK(diff.norm() / plan.xi.norm() <= 1e-6);
  }
}
