#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "satedge/admm.hpp"
#include "satedge/hybrid_ddqn.hpp"

using namespace satedge;

namespace {

struct Fixture {
  Scenario s = generate_scenario(0);
  CandidateEvaluator eval{s, initial_plan(s), CandidatePlan::EqualSplit, 1e-5};
  DualState d = DualState::zeros(s);
  int dim = EpisodeEnv::state_dim(s.n_ues(), s.n_servers());
};

AgentSettings small(AgentKind k) {
  AgentSettings a = k == AgentKind::Hybrid ? AgentSettings::hybrid() : AgentSettings::classical();
  a.hidden = {16, 8};
  a.circuit.n_qubits = 4;
  a.circuit.n_layers = 1;
  a.batch = 8;
  return a;
}

std::vector<Transition> random_transitions(int n, int dim, int actions, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> act(0, actions - 1);
  std::vector<Transition> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].state = Eigen::VectorXd::NullaryExpr(dim, [&] { return g(rng); });
    out[i].next_state = Eigen::VectorXd::NullaryExpr(dim, [&] { return g(rng); });
    out[i].action = act(rng);
    out[i].reward = g(rng);
    out[i].terminal = i % 3 == 0;
  }
  return out;
}

std::vector<const Transition*> ptrs(const std::vector<Transition>& v) {
  std::vector<const Transition*> p;
  for (const auto& t : v) p.push_back(&t);
  return p;
}

int argmax(const Eigen::VectorXd& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

}  // namespace

TEST_SUITE("hybrid_ddqn") {
  TEST_CASE("episode environment") {
    Fixture f;
    EpisodeEnv env(f.eval, f.d);
    CHECK(env.state_dim() == 30);
    Eigen::VectorXd st = env.reset();
    CHECK(st.size() == 30);
    const std::vector<int> acts{1, 0, 1, 2};
    for (int k = 0; k < 4; ++k) {
      CHECK(env.cursor() == k);
      const EpisodeEnv::Step r = env.step(acts[k]);
      CHECK(r.done == (k == 3));
      if (k < 3) CHECK(r.reward == 0.0);
      else CHECK(r.reward == env.reward_of(Assignment(acts)));
      CHECK(r.next_state.size() == 30);
    }
    CHECK(env.partial() == Assignment(acts));
  }

  TEST_CASE("reward orders assignments by relaxed Lagrangian") {
    Fixture f;
    EpisodeEnv env(f.eval, f.d);
    const double norm = f.eval.normalizer();
    CHECK(norm > 0.0);
    for (std::uint64_t i = 0; i < 256; i += 7) {
      const Assignment x = Assignment::from_index(i, 4, 4);
      CHECK(env.reward_of(x) == doctest::Approx(-f.eval.lagrangian(x, f.d) / norm).epsilon(1e-14));
    }
    // Best reward and best feasible objective agree on the same assignment.
    std::uint64_t best = 0;
    double best_r = -1e300;
    for (std::uint64_t i = 0; i < 256; ++i) {
      const double r = env.reward_of(Assignment::from_index(i, 4, 4));
      if (r > best_r) {
        best_r = r;
        best = i;
      }
    }
    CHECK(f.eval.score(Assignment::from_index(best, 4, 4)).feasible);
  }

  TEST_CASE("terminal and double-Q targets") {
    Fixture f;
    AgentSettings a = small(AgentKind::Hybrid);
    a.gamma = 0.9;
    HybridAgent agent(a, f.dim, 4, 3);
    std::mt19937_64 rng(4);
    auto batch = random_transitions(16, f.dim, 4, rng);
    // Move the online nets away from the targets.
    for (int k = 0; k < 20; ++k) agent.train_step(ptrs(batch));

    // Find a next state where the online and target argmax disagree.
    std::normal_distribution<double> g;
    Transition t;
    bool found = false;
    for (int tries = 0; tries < 5000 && !found; ++tries) {
      t.state = Eigen::VectorXd::NullaryExpr(f.dim, [&] { return 3.0 * g(rng); });
      t.next_state = Eigen::VectorXd::NullaryExpr(f.dim, [&] { return 3.0 * g(rng); });
      found = argmax(agent.q_values(t.next_state)) != argmax(agent.q_values(t.next_state, true));
    }
    REQUIRE(found);
    t.reward = 0.25;
    t.terminal = false;
    Transition end = t;
    end.terminal = true;

    const Eigen::VectorXd y = agent.td_targets({&t, &end});
    const Eigen::VectorXd qt = agent.q_values(t.next_state, true);
    const int a_online = argmax(agent.q_values(t.next_state));
    CHECK(y[0] == doctest::Approx(0.25 + 0.9 * qt[a_online]).epsilon(1e-14));
    CHECK(y[0] != doctest::Approx(0.25 + 0.9 * qt.maxCoeff()));
    CHECK(y[1] == 0.25);
  }

  TEST_CASE("loss gradient matches central differences") {
    Fixture f;
    for (AgentKind kind : {AgentKind::Hybrid, AgentKind::Classical}) {
      HybridAgent agent(small(kind), f.dim, 4, 8);
      std::mt19937_64 rng(6);
      auto batch = random_transitions(6, f.dim, 4, rng);
      const auto b = ptrs(batch);
      Eigen::VectorXd y(6);
      for (int i = 0; i < 6; ++i) y[i] = 0.3 * (i - 2.5);

      const HybridAgent::LossGrad lg = agent.loss_and_grad(b, y);
      CHECK(lg.loss == doctest::Approx(agent.loss(b, y)).epsilon(1e-14));
      const Eigen::VectorXd p0 = agent.flat_params();
      REQUIRE(lg.grad.size() == p0.size());
      const double h = 1e-6;
      double worst = 0.0;
      for (Eigen::Index k = 0; k < p0.size(); ++k) {
        Eigen::VectorXd p = p0;
        p[k] += h;
        agent.set_flat_params(p);
        const double up = agent.loss(b, y);
        p[k] -= 2 * h;
        agent.set_flat_params(p);
        const double dn = agent.loss(b, y);
        const double fd = (up - dn) / (2 * h);
        worst = std::max(worst, std::abs(fd - lg.grad[k]) / std::max(1.0, std::abs(fd)));
      }
      agent.set_flat_params(p0);
      CHECK(worst <= 1e-4);
    }
  }

  TEST_CASE("replay buffer capacity and uniform sampling") {
    ReplayBuffer rb(100);
    for (int i = 0; i < 250; ++i) {
      Transition t;
      t.reward = i;
      rb.push(t);
      CHECK(rb.size() <= 100);
    }
    CHECK(rb.size() == 100);
    double lo = 1e9;
    for (std::size_t i = 0; i < rb.size(); ++i) lo = std::min(lo, rb.at(i).reward);
    CHECK(lo == 150.0);  // oldest entries evicted first

    std::mt19937_64 rng(12);
    std::vector<int> counts(100, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[rb.sample_index(rng)];
    double chi2 = 0.0;
    const double expect = draws / 100.0;
    for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < 148.23);  // 99 dof, upper 0.001 quantile
    CHECK(rb.sample(7, rng).size() == 7);
  }

  TEST_CASE("zero quantum mixer reproduces the classical agent") {
    Fixture f;
    AgentSettings hy = AgentSettings::hybrid();
    hy.w_c_init = 1.0;
    hy.w_q_init = 0.0;
    hy.train_mixers = false;
    AgentSettings cl = AgentSettings::classical();
    cl.hidden = hy.hidden;

    HybridAgent a(hy, f.dim, 4, 21), b(cl, f.dim, 4, 21);
    EpisodeEnv ea(f.eval, f.d), eb(f.eval, f.d);
    const Eigen::VectorXd s0 = ea.reset();
    CHECK((a.q_values(s0) - b.q_values(s0)).cwiseAbs().maxCoeff() <= 1e-12);

    const TrainResult ra = train(a, ea, 40);
    const TrainResult rb = train(b, eb, 40);
    REQUIRE(ra.curve.size() == rb.curve.size());
    for (std::size_t i = 0; i < ra.curve.size(); ++i) {
      CHECK(std::abs(ra.curve[i].greedy_reward - rb.curve[i].greedy_reward) <= 1e-12);
      if (!std::isnan(ra.curve[i].loss)) CHECK(std::abs(ra.curve[i].loss - rb.curve[i].loss) <= 1e-12);
    }
    const Eigen::VectorXd pa = a.classical_net().flat_params(), pb = b.classical_net().flat_params();
    CHECK((pa - pb).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.q_values(s0) - b.q_values(s0)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("zero episodes trains nothing") {
    Fixture f;
    HybridAgent agent(small(AgentKind::Classical), f.dim, 4, 1);
    EpisodeEnv env(f.eval, f.d);
    const TrainResult r = train(agent, env, 0);
    CHECK(r.curve.empty());
    CHECK(agent.gradient_steps() == 0);
  }

  TEST_CASE("checkpoint round trip") {
    Fixture f;
    HybridAgent a(small(AgentKind::Hybrid), f.dim, 4, 5);
    const auto dir = std::filesystem::temp_directory_path() / "satedge_unit_ckpt";
    std::filesystem::create_directories(dir);
    a.save(dir / "a.ckpt");
    HybridAgent b(small(AgentKind::Hybrid), f.dim, 4, 99);
    b.load(dir / "a.ckpt");
    CHECK(a.flat_params() == b.flat_params());
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("repair") {
    Fixture f;
    std::vector<Assignment> good, bad;
    for (std::uint64_t i = 0; i < 256; ++i) {
      const Assignment x = Assignment::from_index(i, 4, 4);
      (f.eval.score(x).feasible ? good : bad).push_back(x);
    }
    REQUIRE_FALSE(good.empty());
    REQUIRE_FALSE(bad.empty());
    CHECK(repair_assignment(good.front(), f.eval, f.d) == good.front());
    for (std::size_t i = 0; i < bad.size(); i += 9) CHECK(f.eval.score(repair_assignment(bad[i], f.eval, f.d)).feasible);
  }
}
