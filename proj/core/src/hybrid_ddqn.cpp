#include "satedge/hybrid_ddqn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "satedge/channel.hpp"
#include "satedge/random.hpp"

namespace satedge {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

enum Stream : std::uint64_t { kClassicalInit = 1, kReplay = 2, kExplore = 3, kQuantumInit = 4 };

double huber(double d, double k) { return std::abs(d) <= k ? 0.5 * d * d : k * (std::abs(d) - 0.5 * k); }
double huber_grad(double d, double k) { return std::clamp(d, -k, k); }

int argmax(const VectorXd& v) {
  Eigen::Index i = 0;
  v.maxCoeff(&i);
  return static_cast<int>(i);
}

}  // namespace

AgentSettings AgentSettings::hybrid() { return AgentSettings{}; }

AgentSettings AgentSettings::classical() {
  AgentSettings a;
  a.kind = AgentKind::Classical;
  a.hidden = {256, 128};
  a.w_c_init = 1.0;
  a.w_q_init = 0.0;
  a.train_mixers = false;
  return a;
}

// ---- environment ---------------------------------------------------------

EpisodeEnv::EpisodeEnv(CandidateEvaluator& eval, const DualState& d)
    : eval_(&eval), d_(d), n_ues_(eval.scenario().n_ues()), n_servers_(eval.scenario().n_servers()) {
  const Scenario& s = eval.scenario();
  const LinkGains g = link_gains(s);
  const double hmax = *std::max_element(g.h_access.begin(), g.h_access.end());
  static_features_.resize(n_ues_);
  for (int n = 0; n < n_ues_; ++n) static_features_[n] = g.h_access[n] / hmax;
  const BandwidthPlan& p = eval.plan();
  access_norm_ = (p.b_access / s.radio.b_access_total_hz).cwiseMax(0.0).cwiseMin(1.0);
  backhaul_norm_ = (p.b_s / s.radio.b_s_total_hz).cwiseMax(0.0).cwiseMin(1.0);
  x_.server.assign(n_ues_, -1);
}

VectorXd EpisodeEnv::reset() {
  cursor_ = 0;
  x_.server.assign(n_ues_, -1);
  return encode();
}

VectorXd EpisodeEnv::encode() const {
  const Scenario& s = eval_->scenario();
  VectorXd f = VectorXd::Zero(state_dim());
  const int n_ = n_ues_;
  f.head(n_) = static_features_;
  for (int n = 0; n < n_; ++n) {
    const int j = x_.server[n];
    if (j < 0) continue;
    f[n_ + n] = access_norm_(n, j);
    if (j < s.n_sats()) f[2 * n_ + n] = backhaul_norm_(n, j);
    f[3 * n_ + 2 + n * n_servers_ + j] = 1.0;
  }
  const int c = std::min(cursor_, n_ - 1);
  double pue_max = 0.0;
  double pbs_max = 0.0;
  for (int n = 0; n < n_; ++n) {
    pue_max = std::max(pue_max, s.radio.p_ue_w(n));
    pbs_max = std::max(pbs_max, s.radio.p_bs_w(n));
  }
  f[3 * n_] = pue_max > 0.0 ? s.radio.p_ue_w(c) / pue_max : 0.0;
  f[3 * n_ + 1] = pbs_max > 0.0 ? s.radio.p_bs_w(c) / pbs_max : 0.0;
  return f;
}

double EpisodeEnv::reward_of(const Assignment& x) { return -eval_->lagrangian(x, d_) / eval_->normalizer(); }

EpisodeEnv::Step EpisodeEnv::step(int action) {
  if (cursor_ >= n_ues_) throw std::logic_error("EpisodeEnv::step after the episode ended");
  if (action < 0 || action >= n_servers_) throw std::out_of_range("EpisodeEnv::step: action out of range");
  x_.server[cursor_++] = action;
  Step st;
  st.done = cursor_ == n_ues_;
  st.next_state = encode();
  if (st.done) st.reward = reward_of(x_);
  return st;
}

// ---- replay --------------------------------------------------------------

void ReplayBuffer::push(Transition t) {
  if (capacity_ == 0) return;
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

std::size_t ReplayBuffer::sample_index(std::mt19937_64& rng) const { return uniform_index(rng, data_.size()); }

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&data_[sample_index(rng)]);
  return out;
}

// ---- agent ---------------------------------------------------------------

struct HybridAgent::Grad {
  DenseNet<double>::Grads net;
  VectorXd theta;
  MatrixXd comp_w;
  VectorXd comp_b;
  VectorXd w_c;
  VectorXd w_q;
  double loss = 0.0;
};

HybridAgent::HybridAgent(const AgentSettings& settings, int state_dim, int n_actions, std::uint64_t seed)
    : settings_(settings),
      state_dim_(state_dim),
      n_actions_(n_actions),
      explore_rng_(derive_seed(seed, kExplore)),
      replay_rng_(derive_seed(seed, kReplay)),
      replay_(static_cast<std::size_t>(std::max(0, settings.replay_capacity))) {
  std::vector<int> sizes{state_dim};
  sizes.insert(sizes.end(), settings_.hidden.begin(), settings_.hidden.end());
  sizes.push_back(n_actions);
  net_ = DenseNet<double>(sizes, derive_seed(seed, kClassicalInit));
  net_target_ = net_;
  w_c_ = VectorXd::Constant(n_actions, settings_.w_c_init);
  w_q_ = VectorXd::Constant(n_actions, quantum() ? settings_.w_q_init : 0.0);
  adam_wc_ = {VectorXd::Zero(n_actions), VectorXd::Zero(n_actions)};
  adam_wq_ = {VectorXd::Zero(n_actions), VectorXd::Zero(n_actions)};
  if (quantum()) {
    settings_.circuit.n_readout = n_actions;
    const CircuitSpec& c = settings_.circuit;
    if (c.n_qubits < n_actions) throw std::invalid_argument("HybridAgent: fewer qubits than actions");
    std::mt19937_64 rng(derive_seed(seed, kQuantumInit));
    theta_.resize(c.n_params());
    for (Eigen::Index i = 0; i < theta_.size(); ++i) theta_[i] = uniform_real(rng, -0.1, 0.1) * std::numbers::pi;
    const double lim = std::numbers::pi / std::sqrt(static_cast<double>(state_dim));
    comp_w_.resize(c.n_angles(), state_dim);
    for (Eigen::Index col = 0; col < comp_w_.cols(); ++col)
      for (Eigen::Index r = 0; r < comp_w_.rows(); ++r) comp_w_(r, col) = uniform_real(rng, -lim, lim);
    comp_b_ = VectorXd::Zero(c.n_angles());
    adam_theta_ = {VectorXd::Zero(theta_.size()), VectorXd::Zero(theta_.size())};
    adam_comp_w_ = {MatrixXd::Zero(comp_w_.rows(), comp_w_.cols()), MatrixXd::Zero(comp_w_.rows(), comp_w_.cols())};
    adam_comp_b_ = {VectorXd::Zero(comp_b_.size()), VectorXd::Zero(comp_b_.size())};
  }
  sync_targets();
}

void HybridAgent::sync_targets() {
  net_target_ = net_;
  theta_target_ = theta_;
  comp_w_target_ = comp_w_;
  comp_b_target_ = comp_b_;
  w_c_target_ = w_c_;
  w_q_target_ = w_q_;
}

VectorXd HybridAgent::angles(const VectorXd& state, bool target) const {
  return target ? VectorXd(comp_w_target_ * state + comp_b_target_) : VectorXd(comp_w_ * state + comp_b_);
}

HybridAgent::Branches HybridAgent::branches(const VectorXd& state, bool target) const {
  Branches b;
  b.q_c = (target ? net_target_ : net_).forward(state);
  const VectorXd& wc = target ? w_c_target_ : w_c_;
  const VectorXd& wq = target ? w_q_target_ : w_q_;
  if (quantum()) {
    b.q_q = run(settings_.circuit, angles(state, target), target ? theta_target_ : theta_);
    b.q = wc.cwiseProduct(b.q_c) + wq.cwiseProduct(b.q_q);
  } else {
    b.q_q = VectorXd::Zero(n_actions_);
    b.q = wc.cwiseProduct(b.q_c);
  }
  return b;
}

VectorXd HybridAgent::q_values(const VectorXd& state, bool target) const { return branches(state, target).q; }

MatrixXd HybridAgent::q_batch(const MatrixXd& states, bool target) const {
  MatrixXd qc = (target ? net_target_ : net_).forward_batch(states);
  const VectorXd& wc = target ? w_c_target_ : w_c_;
  const VectorXd& wq = target ? w_q_target_ : w_q_;
  MatrixXd q = wc.asDiagonal() * qc;
  if (quantum()) {
    for (Eigen::Index k = 0; k < states.cols(); ++k) {
      const VectorXd z =
          run(settings_.circuit, angles(states.col(k), target), target ? theta_target_ : theta_);
      q.col(k) += wq.cwiseProduct(z);
    }
  }
  return q;
}

int HybridAgent::greedy_action(const VectorXd& state) const { return argmax(q_values(state)); }

VectorXd HybridAgent::td_targets(const std::vector<const Transition*>& batch) const {
  VectorXd y(static_cast<Eigen::Index>(batch.size()));
  std::vector<Eigen::Index> open;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = batch[i]->reward;
    if (!batch[i]->terminal) open.push_back(static_cast<Eigen::Index>(i));
  }
  if (open.empty()) return y;
  MatrixXd next(state_dim_, static_cast<Eigen::Index>(open.size()));
  for (std::size_t k = 0; k < open.size(); ++k) next.col(static_cast<Eigen::Index>(k)) = batch[open[k]]->next_state;
  const MatrixXd q_on = q_batch(next, false);
  const MatrixXd q_tg = q_batch(next, true);
  for (std::size_t k = 0; k < open.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const int a = argmax(q_on.col(col));
    y[open[k]] += settings_.gamma * q_tg(a, col);
  }
  return y;
}

HybridAgent::Grad HybridAgent::compute_grad(const std::vector<const Transition*>& batch,
                                            const VectorXd& targets) const {
  const auto bsz = static_cast<Eigen::Index>(batch.size());
  Grad g;
  g.net = net_.zero_grads();
  g.w_c = VectorXd::Zero(n_actions_);
  g.w_q = VectorXd::Zero(n_actions_);
  if (quantum()) {
    g.theta = VectorXd::Zero(theta_.size());
    g.comp_w = MatrixXd::Zero(comp_w_.rows(), comp_w_.cols());
    g.comp_b = VectorXd::Zero(comp_b_.size());
  }
  if (bsz == 0) return g;

  MatrixXd states(state_dim_, bsz);
  for (Eigen::Index k = 0; k < bsz; ++k) states.col(k) = batch[k]->state;
  const MatrixXd qc = net_.forward_batch(states);
  MatrixXd qq = MatrixXd::Zero(n_actions_, bsz);
  std::vector<VectorXd> ang;
  if (quantum()) {
    for (Eigen::Index k = 0; k < bsz; ++k) {
      ang.push_back(angles(states.col(k), false));
      qq.col(k) = run(settings_.circuit, ang.back(), theta_);
    }
  }

  MatrixXd dout = MatrixXd::Zero(n_actions_, bsz);
  for (Eigen::Index k = 0; k < bsz; ++k) {
    const int a = batch[k]->action;
    const double q = w_c_[a] * qc(a, k) + (quantum() ? w_q_[a] * qq(a, k) : 0.0);
    const double d = q - targets[k];
    g.loss += huber(d, settings_.huber_delta) / static_cast<double>(bsz);
    const double dq = huber_grad(d, settings_.huber_delta) / static_cast<double>(bsz);
    dout(a, k) = w_c_[a] * dq;
    if (settings_.train_mixers) {
      g.w_c[a] += dq * qc(a, k);
      if (quantum()) g.w_q[a] += dq * qq(a, k);
    }
    if (quantum() && w_q_[a] != 0.0) {
      VectorXd w = VectorXd::Zero(n_actions_);
      w[a] = w_q_[a] * dq;
      const VqcVjp vjp = adjoint_vjp(settings_.circuit, ang[k], theta_, w);
      g.theta += vjp.d_params;
      g.comp_w.noalias() += vjp.d_angles * states.col(k).transpose();
      g.comp_b += vjp.d_angles;
    }
  }
  net_.backward(states, dout, g.net);
  return g;
}

HybridAgent::LossGrad HybridAgent::loss_and_grad(const std::vector<const Transition*>& batch,
                                                 const VectorXd& targets) const {
  const Grad g = compute_grad(batch, targets);
  std::vector<VectorXd> parts{DenseNet<double>::flatten(g.net)};
  if (quantum()) {
    parts.push_back(g.theta);
    parts.push_back(g.comp_w.reshaped());
    parts.push_back(g.comp_b);
  }
  if (settings_.train_mixers) {
    parts.push_back(g.w_c);
    if (quantum()) parts.push_back(g.w_q);
  }
  Eigen::Index n = 0;
  for (const auto& p : parts) n += p.size();
  LossGrad out;
  out.loss = g.loss;
  out.grad.resize(n);
  Eigen::Index k = 0;
  for (const auto& p : parts) {
    out.grad.segment(k, p.size()) = p;
    k += p.size();
  }
  return out;
}

double HybridAgent::loss(const std::vector<const Transition*>& batch, const VectorXd& targets) const {
  double l = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const VectorXd q = q_values(batch[k]->state);
    l += huber(q[batch[k]->action] - targets[static_cast<Eigen::Index>(k)], settings_.huber_delta);
  }
  return batch.empty() ? 0.0 : l / static_cast<double>(batch.size());
}

VectorXd HybridAgent::flat_params() const {
  std::vector<VectorXd> parts{net_.flat_params()};
  if (quantum()) {
    parts.push_back(theta_);
    parts.push_back(comp_w_.reshaped());
    parts.push_back(comp_b_);
  }
  if (settings_.train_mixers) {
    parts.push_back(w_c_);
    if (quantum()) parts.push_back(w_q_);
  }
  Eigen::Index n = 0;
  for (const auto& p : parts) n += p.size();
  VectorXd out(n);
  Eigen::Index k = 0;
  for (const auto& p : parts) {
    out.segment(k, p.size()) = p;
    k += p.size();
  }
  return out;
}

void HybridAgent::set_flat_params(const VectorXd& p) {
  Eigen::Index k = 0;
  auto take = [&](Eigen::Index n) {
    if (k + n > p.size()) throw std::invalid_argument("HybridAgent::set_flat_params: size mismatch");
    VectorXd v = p.segment(k, n);
    k += n;
    return v;
  };
  net_.set_flat_params(take(net_.n_params()));
  if (quantum()) {
    theta_ = take(theta_.size());
    comp_w_.reshaped() = take(comp_w_.size());
    comp_b_ = take(comp_b_.size());
  }
  if (settings_.train_mixers) {
    w_c_ = take(n_actions_);
    if (quantum()) w_q_ = take(n_actions_);
  }
  if (k != p.size()) throw std::invalid_argument("HybridAgent::set_flat_params: size mismatch");
}

double HybridAgent::train_step(const std::vector<const Transition*>& batch) {
  const VectorXd y = td_targets(batch);
  const Grad g = compute_grad(batch, y);
  if (!std::isfinite(g.loss)) return g.loss;
  AdamConfig cc;
  cc.lr = settings_.lr_classical;
  net_.adam_step(g.net, cc);
  AdamConfig qc;
  qc.lr = settings_.lr_quantum;
  ++quantum_step_;
  if (quantum()) {
    adam_update(theta_, g.theta, adam_theta_.m, adam_theta_.v, quantum_step_, qc);
    adam_update(comp_w_, g.comp_w, adam_comp_w_.m, adam_comp_w_.v, quantum_step_, qc);
    adam_update(comp_b_, g.comp_b, adam_comp_b_.m, adam_comp_b_.v, quantum_step_, qc);
  }
  if (settings_.train_mixers) {
    adam_update(w_c_, g.w_c, adam_wc_.m, adam_wc_.v, quantum_step_, qc);
    if (quantum()) adam_update(w_q_, g.w_q, adam_wq_.m, adam_wq_.v, quantum_step_, qc);
  }
  ++grad_steps_;
  if (settings_.target_sync > 0 && grad_steps_ % settings_.target_sync == 0) sync_targets();
  return g.loss;
}

void HybridAgent::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write agent checkpoint " + path.string());
  os << "satedge-agent 1\n";
  os << (quantum() ? "hybrid" : "classical") << ' ' << state_dim_ << ' ' << n_actions_ << ' '
     << settings_.circuit.n_qubits << ' ' << settings_.circuit.n_layers << ' ' << settings_.train_mixers << '\n';
  net_.save(os);
  os.precision(17);
  auto dump = [&](const char* tag, const VectorXd& v) {
    os << tag << ' ' << v.size();
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ' ' << v[i];
    os << '\n';
  };
  dump("theta", theta_);
  dump("comp_w", comp_w_.reshaped());
  dump("comp_b", comp_b_);
  dump("w_c", w_c_);
  dump("w_q", w_q_);
}

void HybridAgent::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open agent checkpoint " + path.string());
  std::string tag, kind;
  int version = 0, sd = 0, na = 0, nq = 0, nl = 0, tm = 0;
  is >> tag >> version >> kind >> sd >> na >> nq >> nl >> tm;
  if (tag != "satedge-agent" || version != 1) throw std::runtime_error("not an agent checkpoint: " + path.string());
  if (sd != state_dim_ || na != n_actions_ || (kind == "hybrid") != quantum())
    throw std::runtime_error("agent checkpoint shape does not match: " + path.string());
  net_ = DenseNet<double>::load(is);
  auto read = [&](const char* want, Eigen::Index expect) {
    std::string t;
    Eigen::Index n = 0;
    is >> t >> n;
    if (t != want || n != expect) throw std::runtime_error(std::string("agent checkpoint: bad block ") + want);
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) is >> v[i];
    if (!is) throw std::runtime_error("agent checkpoint truncated");
    return v;
  };
  theta_ = read("theta", theta_.size());
  comp_w_.reshaped() = read("comp_w", comp_w_.size());
  comp_b_ = read("comp_b", comp_b_.size());
  w_c_ = read("w_c", n_actions_);
  w_q_ = read("w_q", n_actions_);
  net_.reset_optimizer();
  sync_targets();
}

// ---- training ------------------------------------------------------------

Assignment greedy_assignment(const HybridAgent& agent, EpisodeEnv& env) {
  VectorXd s = env.reset();
  for (int k = 0; k < env.n_ues(); ++k) s = env.step(agent.greedy_action(s)).next_state;
  return env.partial();
}

TrainResult train(HybridAgent& agent, EpisodeEnv& env, int episodes, bool warm) {
  const AgentSettings& st = agent.settings();
  TrainResult out;
  const double eps0 = warm ? st.eps_warm_start : st.eps_start;
  const double decay = std::max(1.0, st.eps_decay_frac * episodes);
  for (int ep = 0; ep < episodes; ++ep) {
    const double frac = std::min(1.0, ep / decay);
    const double eps = eps0 + (st.eps_end - eps0) * frac;
    VectorXd s = env.reset();
    bool done = false;
    while (!done) {
      int a = 0;
      if (uniform01(agent.explore_rng()) < eps) {
        a = static_cast<int>(uniform_index(agent.explore_rng(), static_cast<std::uint64_t>(env.n_actions())));
      } else {
        a = agent.greedy_action(s);
      }
      EpisodeEnv::Step r = env.step(a);
      agent.replay().push({s, a, r.reward, r.next_state, r.done});
      s = std::move(r.next_state);
      done = r.done;
    }
    double loss_sum = 0.0;
    int steps = 0;
    if (agent.replay().size() >= static_cast<std::size_t>(st.batch)) {
      for (int k = 0; k < st.grad_steps_per_episode; ++k) {
        const auto batch = agent.replay().sample(static_cast<std::size_t>(st.batch), agent.replay_rng());
        const double l = agent.train_step(batch);
        if (!std::isfinite(l)) {
          std::ostringstream os;
          os << "TD loss became non-finite at episode " << ep << " after " << agent.gradient_steps()
             << " gradient steps";
          throw TrainingDiverged(os.str());
        }
        loss_sum += l;
        ++steps;
      }
    }
    const Assignment g = greedy_assignment(agent, env);
    const double reward = env.reward_of(g);
    if (reward > out.best_greedy_reward) {
      out.best_greedy_reward = reward;
      out.best_greedy = g;
    }
    out.curve.push_back({ep, eps, reward, steps ? loss_sum / steps : std::numeric_limits<double>::quiet_NaN()});
  }
  return out;
}

namespace {

double violation_of(CandidateEvaluator& eval, const Assignment& x) {
  const CandidateScore& c = eval.score(x);
  if (!c.feasible) return 1.0 + c.violation;
  const Scenario& s = eval.scenario();
  double v = 0.0;
  for (Eigen::Index n = 0; n < c.latency_res.size(); ++n) v = std::max(v, c.latency_res[n] / s.compute.t_th_s);
  for (Eigen::Index j = 0; j < c.energy_res.size(); ++j) v = std::max(v, c.energy_res[j] / s.compute.e_th_j[j]);
  v = std::max(v, c.access_res / s.radio.b_access_total_hz);
  v = std::max(v, c.backhaul_res / s.radio.b_s_total_hz);
  return v;
}

}  // namespace

Assignment repair_assignment(const Assignment& x, CandidateEvaluator& eval, const DualState& d) {
  const Scenario& s = eval.scenario();
  Assignment cur = x;
  double cur_v = violation_of(eval, cur);
  for (int round = 0; round < s.n_ues() * s.n_servers() && cur_v > 0.0; ++round) {
    Assignment best = cur;
    double best_v = cur_v;
    double best_l = eval.lagrangian(cur, d);
    for (int n = 0; n < s.n_ues(); ++n) {
      for (int j = 0; j < s.n_servers(); ++j) {
        if (j == cur.server[n]) continue;
        Assignment cand = cur;
        cand.server[n] = j;
        const double v = violation_of(eval, cand);
        const double l = eval.lagrangian(cand, d);
        if (v < best_v || (v == best_v && v < cur_v && l < best_l)) {
          best = cand;
          best_v = v;
          best_l = l;
        }
      }
    }
    if (best_v >= cur_v) break;
    cur = best;
    cur_v = best_v;
  }
  return cur;
}

XSubproblemResult solve_x_subproblem(HybridAgent& agent, CandidateEvaluator& eval, const DualState& d0,
                                     const AscentSchedule& schedule, int first_episodes, int warm_episodes) {
  XSubproblemResult out;
  out.dual = d0;
  out.dual_value = -std::numeric_limits<double>::infinity();
  DualState d = d0;
  const double e_ref = eval.normalizer();
  Assignment best_x;
  const int iters = std::max(1, schedule.iters);
  for (int t = 0; t < iters; ++t) {
    EpisodeEnv env(eval, d);
    const bool warm = agent.gradient_steps() > 0;
    TrainResult tr = train(agent, env, t == 0 ? first_episodes : warm_episodes, warm);
    Assignment x = greedy_assignment(agent, env);
    if (!tr.curve.empty() && eval.lagrangian(tr.best_greedy, d) < eval.lagrangian(x, d)) x = tr.best_greedy;
    const double value = eval.lagrangian(x, d);
    if (value > out.dual_value) {
      out.dual_value = value;
      out.dual = d;
      best_x = x;
    }
    if (t == 0) out.training = std::move(tr);
    else out.training.curve.insert(out.training.curve.end(), tr.curve.begin(), tr.curve.end());
    const DualState next =
        ascent_step(d, eval.score(x), eval.scenario(), schedule.alpha0 / std::sqrt(1.0 + t), e_ref);
    const bool moved = (next.lambda - d.lambda).norm() > 0.0 || (next.lambda_bar - d.lambda_bar).norm() > 0.0 ||
                       next.phi != d.phi || next.psi != d.psi || (next.mu - d.mu).norm() > 0.0;
    if (!moved) break;
    d = next;
  }
  out.x = repair_assignment(best_x, eval, out.dual);
  return out;
}

Assignment AgentMinimizer::minimize(CandidateEvaluator& eval, const DualState& d) {
  EpisodeEnv env(eval, d);
  TrainResult tr = train(*agent_, env, episodes_, trained_);
  trained_ = true;
  Assignment x = greedy_assignment(*agent_, env);
  if (!tr.curve.empty() && eval.lagrangian(tr.best_greedy, d) < eval.lagrangian(x, d)) x = tr.best_greedy;
  return x;
}

}  // namespace satedge
