#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "satedge/dual_ascent.hpp"
#include "satedge/mlp.hpp"
#include "satedge/vqc.hpp"

namespace satedge {

enum class AgentKind { Hybrid, Classical };

struct AgentSettings {
  AgentKind kind = AgentKind::Hybrid;
  std::vector<int> hidden{64, 32};
  CircuitSpec circuit{};  // n_readout is overwritten with J
  double w_c_init = 0.5;
  double w_q_init = 0.5;
  bool train_mixers = true;

  int replay_capacity = 10000;
  int batch = 64;
  double eps_start = 1.0;
  double eps_end = 0.05;
  double eps_decay_frac = 0.6;
  double eps_warm_start = 0.2;  // first epsilon of a warm-started run
  int target_sync = 50;         // gradient steps between target copies
  int grad_steps_per_episode = 5;
  double lr_classical = 1e-3;
  double lr_quantum = 5e-3;     // circuit, compressor and mixers
  double gamma = 1.0;
  double huber_delta = 1.0;

  /// Hybrid defaults: classical branch 64/32, quantum branch on.
  static AgentSettings hybrid();
  /// Classical-only: 256/128 hidden, quantum branch off, mixers fixed at
  /// w_c = 1, w_q = 0.
  static AgentSettings classical();
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sequential assignment episode: step k fixes the server of UE k; the
/// reward is zero until the last step, then minus the relaxed Lagrangian of
/// the completed assignment divided by the evaluator's normalizer.
class EpisodeEnv {
 public:
  EpisodeEnv(CandidateEvaluator& eval, const DualState& d);

  static int state_dim(int n_ues, int n_servers) { return n_ues * (n_servers + 3) + 2; }
  int state_dim() const { return state_dim(n_ues_, n_servers_); }
  int n_actions() const { return n_servers_; }
  int n_ues() const { return n_ues_; }

  Eigen::VectorXd reset();
  struct Step {
    Eigen::VectorXd next_state;
    double reward = 0.0;
    bool done = false;
  };
  Step step(int action);

  int cursor() const { return cursor_; }
  const Assignment& partial() const { return x_; }
  /// Reward of a completed assignment without stepping through it.
  double reward_of(const Assignment& x);
  Eigen::VectorXd encode() const;

 private:
  CandidateEvaluator* eval_;
  DualState d_;
  int n_ues_;
  int n_servers_;
  int cursor_ = 0;
  Assignment x_;
  Eigen::VectorXd static_features_;  // link gains and powers
  Eigen::MatrixXd access_norm_;      // N x J
  Eigen::MatrixXd backhaul_norm_;    // N x (J-1)
};

struct Transition {
  Eigen::VectorXd state;
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool terminal = false;
};

/// Fixed-capacity FIFO with uniform sampling with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}
  void push(Transition t);
  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const;
  std::size_t sample_index(std::mt19937_64& rng) const;
  const Transition& at(std::size_t i) const { return data_[i]; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> data_;
};

/// Q-network with classical and quantum branches mixed per action:
/// Q = w_c .* Q_c + w_q .* Q_q. The quantum branch reads the state through
/// a trainable affine compressor into 2 n_qubits encoding angles.
class HybridAgent {
 public:
  HybridAgent(const AgentSettings& settings, int state_dim, int n_actions, std::uint64_t seed);

  const AgentSettings& settings() const { return settings_; }
  bool quantum() const { return settings_.kind == AgentKind::Hybrid; }
  int n_actions() const { return n_actions_; }
  int state_dim() const { return state_dim_; }

  struct Branches {
    Eigen::VectorXd q;
    Eigen::VectorXd q_c;
    Eigen::VectorXd q_q;
  };
  Branches branches(const Eigen::VectorXd& state, bool target = false) const;
  Eigen::VectorXd q_values(const Eigen::VectorXd& state, bool target = false) const;
  /// Batch forward, one state per column; returns J x batch.
  Eigen::MatrixXd q_batch(const Eigen::MatrixXd& states, bool target = false) const;

  int greedy_action(const Eigen::VectorXd& state) const;

  /// Double-Q targets: y = r for terminal transitions, otherwise
  /// r + gamma * Q_target(s', argmax_a Q_online(s', a)).
  Eigen::VectorXd td_targets(const std::vector<const Transition*>& batch) const;

  /// Gradient of the mean Huber TD loss, flattened over every trainable
  /// block in the order of flat_params().
  struct LossGrad {
    double loss = 0.0;
    Eigen::VectorXd grad;
  };
  LossGrad loss_and_grad(const std::vector<const Transition*>& batch, const Eigen::VectorXd& targets) const;
  double loss(const std::vector<const Transition*>& batch, const Eigen::VectorXd& targets) const;

  /// One optimizer step on a batch; returns the loss before the step.
  double train_step(const std::vector<const Transition*>& batch);
  void sync_targets();

  /// Every trainable parameter: classical net, then (hybrid only) circuit,
  /// compressor weights, compressor bias, then (when trained) w_c and w_q.
  Eigen::VectorXd flat_params() const;
  void set_flat_params(const Eigen::VectorXd& p);

  Eigen::VectorXd& w_c() { return w_c_; }
  Eigen::VectorXd& w_q() { return w_q_; }
  const Eigen::VectorXd& w_c() const { return w_c_; }
  const Eigen::VectorXd& w_q() const { return w_q_; }
  DenseNet<double>& classical_net() { return net_; }
  const DenseNet<double>& classical_net() const { return net_; }
  const Eigen::VectorXd& circuit_params() const { return theta_; }
  long gradient_steps() const { return grad_steps_; }

  std::mt19937_64& explore_rng() { return explore_rng_; }
  std::mt19937_64& replay_rng() { return replay_rng_; }
  ReplayBuffer& replay() { return replay_; }

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  struct Grad;
  Grad compute_grad(const std::vector<const Transition*>& batch, const Eigen::VectorXd& targets) const;
  Eigen::VectorXd angles(const Eigen::VectorXd& state, bool target) const;

  AgentSettings settings_;
  int state_dim_;
  int n_actions_;
  DenseNet<double> net_, net_target_;
  Eigen::VectorXd theta_, theta_target_;
  Eigen::MatrixXd comp_w_, comp_w_target_;
  Eigen::VectorXd comp_b_, comp_b_target_;
  Eigen::VectorXd w_c_, w_q_, w_c_target_, w_q_target_;
  AdamMoments<Eigen::VectorXd> adam_theta_, adam_comp_b_, adam_wc_, adam_wq_;
  AdamMoments<Eigen::MatrixXd> adam_comp_w_;
  long quantum_step_ = 0;
  long grad_steps_ = 0;
  std::mt19937_64 explore_rng_;
  std::mt19937_64 replay_rng_;
  ReplayBuffer replay_;
};

struct CurveRow {
  int episode = 0;
  double epsilon = 0.0;
  double greedy_reward = 0.0;
  double loss = 0.0;  // mean over this episode's gradient steps; NaN if none
};

struct TrainResult {
  std::vector<CurveRow> curve;
  Assignment best_greedy;           // best greedy completion seen
  double best_greedy_reward = -std::numeric_limits<double>::infinity();
};

/// Epsilon-greedy rollouts, replay sampling and Huber TD steps with periodic
/// target copies. `warm` starts epsilon at eps_warm_start instead of
/// eps_start. Throws TrainingDiverged on a non-finite loss.
TrainResult train(HybridAgent& agent, EpisodeEnv& env, int episodes, bool warm = false);

/// Greedy rollout of the current policy.
Assignment greedy_assignment(const HybridAgent& agent, EpisodeEnv& env);

/// Single-UE moves, most violation-reducing first, until the candidate
/// admits a plan. Returns x unchanged when it is already feasible.
Assignment repair_assignment(const Assignment& x, CandidateEvaluator& eval, const DualState& d);

struct XSubproblemResult {
  Assignment x;
  DualState dual;
  double dual_value = 0.0;
  TrainResult training;
};

/// Alternates agent (re)training with projected dual steps; returns the
/// greedy assignment at the best dual iterate, repaired if needed.
XSubproblemResult solve_x_subproblem(HybridAgent& agent, CandidateEvaluator& eval, const DualState& d0,
                                     const AscentSchedule& schedule, int first_episodes, int warm_episodes);

/// Inner minimizer backed by a trained agent.
class AgentMinimizer : public XMinimizer {
 public:
  AgentMinimizer(HybridAgent& agent, int episodes) : agent_(&agent), episodes_(episodes) {}
  Assignment minimize(CandidateEvaluator& eval, const DualState& d) override;

 private:
  HybridAgent* agent_;
  int episodes_;
  bool trained_ = false;
};

}  // namespace satedge
