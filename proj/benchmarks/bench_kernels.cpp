#include <benchmark/benchmark.h>

#include <random>

#include "satedge/baselines.hpp"
#include "satedge/hybrid_ddqn.hpp"
#include "satedge/mlp.hpp"
#include "satedge/vqc.hpp"

using namespace satedge;

static void BM_SolveGivenAssignment(benchmark::State& state) {
  const Scenario s = generate_scenario(0);
  const Assignment x({1, 0, 1, 2});
  for (auto _ : state) benchmark::DoNotOptimize(solve_given_assignment(x, s));
}
BENCHMARK(BM_SolveGivenAssignment)->Unit(benchmark::kMicrosecond);

static void BM_BUpdate(benchmark::State& state) {
  const Scenario s = generate_scenario(0);
  const Assignment x({3, 0, 1, 3});
  const BandwidthPlan p = initial_plan(s);
  for (auto _ : state) benchmark::DoNotOptimize(solve_B_subproblem(x, p, s, 1e-5));
}
BENCHMARK(BM_BUpdate)->Unit(benchmark::kMicrosecond);

static void BM_ExhaustiveSearch(benchmark::State& state) {
  const Scenario s = generate_scenario(0);
  for (auto _ : state) benchmark::DoNotOptimize(exhaustive_search(s));
}
BENCHMARK(BM_ExhaustiveSearch)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_LookaheadScoring(benchmark::State& state) {
  const Scenario s = generate_scenario(0);
  const AdmmSettings st;
  for (auto _ : state) {
    CandidateEvaluator eval(s, initial_plan(s), st.candidate_plan, st.rho, st.barrier, st.lookahead_steps);
    eval.prefetch_all(1);
    benchmark::DoNotOptimize(eval.evaluations());
  }
}
BENCHMARK(BM_LookaheadScoring)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_VqcForward(benchmark::State& state) {
  CircuitSpec spec;
  spec.n_qubits = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  Eigen::VectorXd a(spec.n_angles()), p(spec.n_params());
  for (auto& v : a) v = u(rng);
  for (auto& v : p) v = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(run(spec, a, p));
}
BENCHMARK(BM_VqcForward)->Arg(4)->Arg(8)->Arg(10);

static void BM_VqcAdjoint(benchmark::State& state) {
  CircuitSpec spec;
  spec.n_qubits = static_cast<int>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  Eigen::VectorXd a(spec.n_angles()), p(spec.n_params());
  for (auto& v : a) v = u(rng);
  for (auto& v : p) v = u(rng);
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(spec.n_readout);
  for (auto _ : state) benchmark::DoNotOptimize(adjoint_vjp(spec, a, p, w));
}
BENCHMARK(BM_VqcAdjoint)->Arg(4)->Arg(8);

static void BM_MlpBatchBackward(benchmark::State& state) {
  DenseNet<double> net({30, 256, 128, 4}, 3);
  const Eigen::MatrixXd in = Eigen::MatrixXd::Random(30, 64);
  const Eigen::MatrixXd dout = Eigen::MatrixXd::Random(4, 64);
  for (auto _ : state) {
    auto g = net.zero_grads();
    benchmark::DoNotOptimize(net.backward(in, dout, g));
  }
}
BENCHMARK(BM_MlpBatchBackward)->Unit(benchmark::kMicrosecond);

static void BM_AgentTrainStep(benchmark::State& state) {
  const bool hybrid = state.range(0) != 0;
  const Scenario s = generate_scenario(0);
  const AdmmSettings st;
  CandidateEvaluator eval(s, initial_plan(s), st.candidate_plan, st.rho, st.barrier, st.lookahead_steps);
  eval.prefetch_all(1);
  const DualState d = DualState::zeros(s);
  EpisodeEnv env(eval, d);
  HybridAgent agent(hybrid ? AgentSettings::hybrid() : AgentSettings::classical(), env.state_dim(),
                    env.n_actions(), 7);
  train(agent, env, 20);
  for (auto _ : state) {
    auto batch = agent.replay().sample(agent.settings().batch, agent.replay_rng());
    benchmark::DoNotOptimize(agent.train_step(batch));
  }
}
BENCHMARK(BM_AgentTrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
