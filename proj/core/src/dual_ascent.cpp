#include "satedge/dual_ascent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "satedge/cost_model.hpp"

namespace satedge {

namespace {

constexpr std::uint64_t kEnumerationCap = 1'000'000;

double scaled_violation(const ConstraintResiduals& r, const Scenario& s) {
  double v = 0.0;
  for (Eigen::Index n = 0; n < r.latency.size(); ++n) v = std::max(v, r.latency[n] / s.compute.t_th_s);
  v = std::max(v, r.access_total / s.radio.b_access_total_hz);
  v = std::max(v, r.backhaul_total / s.radio.b_s_total_hz);
  for (Eigen::Index j = 0; j < r.sat_energy.size(); ++j) v = std::max(v, r.sat_energy[j] / s.compute.e_th_j[j]);
  return std::isfinite(v) ? v : 1.0;
}

void fill_residuals(CandidateScore& c, const ConstraintResiduals& r) {
  c.assignment_res = r.assignment;
  c.latency_res = r.latency;
  c.access_res = r.access_total;
  c.backhaul_res = r.backhaul_total;
  c.energy_res = r.sat_energy;
}

void zero_residuals(CandidateScore& c, const Scenario& s) {
  c.assignment_res = Eigen::VectorXd::Zero(s.n_ues());
  c.latency_res = Eigen::VectorXd::Zero(s.n_ues());
  c.access_res = 0.0;
  c.backhaul_res = 0.0;
  c.energy_res = Eigen::VectorXd::Zero(s.n_sats());
}

}  // namespace

DualState DualState::zeros(const Scenario& s) {
  DualState d;
  d.lambda = Eigen::VectorXd::Zero(s.n_ues());
  d.lambda_bar = Eigen::VectorXd::Zero(s.n_ues());
  d.mu = Eigen::VectorXd::Zero(s.n_sats());
  return d;
}

bool DualState::valid() const {
  return lambda.allFinite() && lambda_bar.allFinite() && mu.allFinite() && std::isfinite(phi) &&
         std::isfinite(psi) && (lambda_bar.array() >= 0.0).all() && (mu.array() >= 0.0).all() && phi >= 0.0 &&
         psi >= 0.0;
}

CandidateEvaluator::CandidateEvaluator(const Scenario& s, BandwidthPlan plan, CandidatePlan mode, double rho,
                                       BarrierSettings barrier, int lookahead_steps)
    : s_(&s), plan_(std::move(plan)), mode_(mode), rho_(rho), barrier_(barrier), steps_(lookahead_steps) {
  if (lookahead_steps < 1) throw std::invalid_argument("CandidateEvaluator: lookahead_steps must be >= 1");
  if ((mode == CandidatePlan::Lookahead || mode == CandidatePlan::LookaheadEnergy) && !(rho > 0.0))
    throw std::invalid_argument("CandidateEvaluator: look-ahead scoring needs rho > 0");
}

CandidateScore CandidateEvaluator::compute(const Assignment& x) const {
  const Scenario& s = *s_;
  CandidateScore c;
  switch (mode_) {
    case CandidatePlan::Frozen: {
      c.plan = plan_;
      const double e = total_energy(x, c.plan, s, true);
      if (!std::isfinite(e)) {
        c.violation = 1.0;
        break;
      }
      c.feasible = true;
      c.objective = augmented_lagrangian(x, c.plan, s, rho_);
      fill_residuals(c, residuals(x, c.plan, s));
      return c;
    }
    case CandidatePlan::EqualSplit: {
      c.plan = equal_split(x, s);
      const ConstraintResiduals r = residuals(x, c.plan, s);
      const double e = total_energy(x, c.plan, s, false);
      if (!std::isfinite(e) || !r.feasible(s, 0.0)) {
        c.violation = scaled_violation(r, s);
        break;
      }
      c.feasible = true;
      c.objective = e;
      fill_residuals(c, r);
      return c;
    }
    case CandidatePlan::Lookahead:
    case CandidatePlan::LookaheadEnergy: {
      Outcome<BUpdate> b = solve_B_subproblem(x, plan_, s, rho_, barrier_);
      if (!b.ok()) {
        c.violation = b.infeasibility().violation;
        break;
      }
      c.plan = solve_xi_subproblem(x, b->plan, s, rho_);
      c.feasible = true;
      if (mode_ == CandidatePlan::Lookahead) {
        c.objective = augmented_lagrangian(x, c.plan, s, rho_);
      } else {
        BandwidthPlan ahead = c.plan;
        for (int k = 1; k < steps_; ++k) {
          Outcome<BUpdate> bk = solve_B_subproblem(x, update_varpi(ahead), s, rho_, barrier_);
          if (!bk.ok()) break;
          ahead = solve_xi_subproblem(x, bk->plan, s, rho_);
        }
        c.objective = total_energy(x, ahead, s, false);
      }
      fill_residuals(c, residuals(x, c.plan, s));
      return c;
    }
  }
  zero_residuals(c, s);
  return c;
}

void CandidateEvaluator::finish(CandidateScore& c) {
  if (!c.feasible) c.objective = sentinel(c.violation);
}

double CandidateEvaluator::normalizer() {
  if (!normalizer_) {
    const Assignment all_bs(std::vector<int>(s_->n_ues(), s_->bs_index()));
    const CandidateScore c = compute(all_bs);
    normalizer_ = (c.feasible && std::abs(c.objective) > 0.0) ? std::abs(c.objective) : 1.0;
  }
  return *normalizer_;
}

double CandidateEvaluator::sentinel(double violation) { return 10.0 * normalizer() + std::max(violation, 0.0); }

const CandidateScore& CandidateEvaluator::score(const Assignment& x) {
  const std::uint64_t key = x.index(s_->n_servers());
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  CandidateScore c = compute(x);
  ++evaluations_;
  finish(c);
  return cache_.emplace(key, std::move(c)).first->second;
}

void CandidateEvaluator::prefetch_all(int threads) {
  const std::uint64_t count = assignment_count(s_->n_ues(), s_->n_servers());
  if (count == 0 || count > kEnumerationCap)
    throw std::length_error("prefetch_all: " + std::to_string(count) + " assignments exceed the enumeration cap");
  normalizer();
  std::vector<std::uint64_t> todo;
  for (std::uint64_t i = 0; i < count; ++i)
    if (!cache_.contains(i)) todo.push_back(i);
  std::vector<CandidateScore> out(todo.size());
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(todo.size())));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k)
      out[k] = compute(Assignment::from_index(todo[k], s_->n_ues(), s_->n_servers()));
  };
  if (n_threads <= 1) {
    work(0, todo.size());
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (todo.size() + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(todo.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t k = 0; k < todo.size(); ++k) {
    finish(out[k]);
    cache_.emplace(todo[k], std::move(out[k]));
  }
  evaluations_ += todo.size();
}

double CandidateEvaluator::lagrangian(const Assignment& x, const DualState& d) {
  const CandidateScore& c = score(x);
  return c.objective + d.lambda.dot(c.assignment_res) + d.lambda_bar.dot(c.latency_res) + d.phi * c.access_res +
         d.psi * c.backhaul_res + d.mu.dot(c.energy_res);
}

Assignment ExhaustiveMinimizer::minimize(CandidateEvaluator& eval, const DualState& d) {
  const Scenario& s = eval.scenario();
  eval.prefetch_all(threads_);
  const std::uint64_t count = assignment_count(s.n_ues(), s.n_servers());
  Assignment best;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < count; ++i) {
    const Assignment x = Assignment::from_index(i, s.n_ues(), s.n_servers());
    const double v = eval.lagrangian(x, d);
    if (v < best_value) {
      best_value = v;
      best = x;
    }
  }
  return best;
}

DualValue eval_dual(const DualState& d, XMinimizer& minimizer, CandidateEvaluator& eval) {
  DualValue out;
  out.x_min = minimizer.minimize(eval, d);
  out.value = eval.lagrangian(out.x_min, d);
  return out;
}

DualState ascent_step(const DualState& d, const CandidateScore& at, const Scenario& s, double alpha, double e_ref) {
  DualState n = d;
  n.lambda += alpha * e_ref * at.assignment_res;
  const double t = s.compute.t_th_s;
  n.lambda_bar = (d.lambda_bar + alpha * e_ref / (t * t) * at.latency_res).cwiseMax(0.0);
  const double a = s.radio.b_access_total_hz;
  const double b = s.radio.b_s_total_hz;
  n.phi = std::max(0.0, d.phi + alpha * e_ref / (a * a) * at.access_res);
  n.psi = std::max(0.0, d.psi + alpha * e_ref / (b * b) * at.backhaul_res);
  for (Eigen::Index j = 0; j < n.mu.size(); ++j) {
    const double e = s.compute.e_th_j[j];
    n.mu[j] = std::max(0.0, d.mu[j] + alpha * e_ref / (e * e) * at.energy_res[j]);
  }
  return n;
}

AscentResult ascend(const DualState& d0, const AscentSchedule& schedule, XMinimizer& minimizer,
                    CandidateEvaluator& eval) {
  const Scenario& s = eval.scenario();
  AscentResult out;
  out.best = d0;
  out.best_value = -std::numeric_limits<double>::infinity();
  DualState d = d0;
  const double e_ref = eval.normalizer();
  for (int t = 0; t < schedule.iters; ++t) {
    const DualValue dv = eval_dual(d, minimizer, eval);
    const CandidateScore& at = eval.score(dv.x_min);
    if (dv.value > out.best_value) {
      out.best_value = dv.value;
      out.best = d;
      out.best_x = dv.x_min;
    }
    AscentTraceRow row;
    row.iter = t;
    row.dual_value = dv.value;
    row.best_value = out.best_value;
    row.latency_res_norm = at.latency_res.cwiseMax(0.0).norm();
    row.band_res_norm = std::hypot(std::max(0.0, at.access_res), std::max(0.0, at.backhaul_res));
    row.energy_res_norm = at.energy_res.cwiseMax(0.0).norm();
    out.trace.push_back(row);
    d = ascent_step(d, at, s, schedule.alpha0 / std::sqrt(1.0 + t), e_ref);
  }
  out.last = d;
  if (schedule.iters <= 0) {
    const DualValue dv = eval_dual(d, minimizer, eval);
    out.best_value = dv.value;
    out.best_x = dv.x_min;
  }
  return out;
}

DualityGap duality_gap(double primal_value, double dual_value, double tol) {
  DualityGap g;
  g.gap = primal_value - dual_value;
  g.relative = primal_value != 0.0 ? g.gap / std::abs(primal_value) : g.gap;
  g.weak_duality_violated = g.gap < -tol * std::max(1.0, std::abs(primal_value));
  return g;
}

}  // namespace satedge
