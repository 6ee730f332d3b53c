#include "satedge/convex_bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "satedge/channel.hpp"
#include "satedge/cost_model.hpp"

namespace satedge {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1/r(u) and its first two derivatives, u in MHz, r(u) = u log2(1 + c/u).
struct InvRate {
  double q, dq, d2q;
};

InvRate inv_rate(double u, double c) {
  const double l = std::log1p(c / u);
  const double r = u * l / std::numbers::ln2;
  const double r1 = (l - c / (u + c)) / std::numbers::ln2;
  const double r2 = -c * c / (std::numbers::ln2 * u * (u + c) * (u + c));
  return {1.0 / r, -r1 / (r * r), 2.0 * r1 * r1 / (r * r * r) - r2 / (r * r)};
}

struct Var {
  int ue;
  bool access;
  Eigen::Index slot;
  double c;         // MHz
  double k_energy;  // J * MHz-rate units: energy = k_energy * q(u)
  double k_lat;     // latency = k_lat * q(u)
  double target;    // MHz
};

// The active-link program for one assignment.
class Program {
 public:
  Program(const Assignment& x, const Scenario& s, double rho, const VectorXd* targets_hz, bool include_terr_energy,
          double floor_hz)
      : rho_(rho), floor_(floor_hz / kHzPerMHz), t_th_(s.compute.t_th_s) {
    const LinkModel link(s);
    const BandwidthPlan shape = BandwidthPlan::zeros(s.n_ues(), s.n_servers());
    const int bs = s.bs_index();
    fixed_.assign(s.n_ues(), 0.0);
    for (int n = 0; n < s.n_ues(); ++n) {
      const int j = x.server[n];
      const double bits = s.topology.task_bits[n];
      const double k_lat = bits / kHzPerMHz;
      const bool on_bs = j == bs;
      Var a{n, true, shape.access_slot(n, j), link.access_c(n) / kHzPerMHz,
            (!on_bs || include_terr_energy) ? bits * s.radio.p_ue_w(n) / kHzPerMHz : 0.0, k_lat, 0.0};
      vars_.push_back(a);
      fixed_[n] = compute_latency(n, x, s);
      if (!on_bs) {
        Var b{n, false, shape.backhaul_slot(n, j), link.backhaul_c(n) / kHzPerMHz,
              bits * s.radio.p_bs_w(n) / kHzPerMHz, k_lat, 0.0};
        vars_.push_back(b);
        fixed_[n] += link.sat_fixed_latency(n, j);
        has_backhaul_ = true;
      }
    }
    for (auto& v : vars_) v.target = targets_hz ? (*targets_hz)[v.slot] / kHzPerMHz : 0.0;
    access_total_ = s.radio.b_access_total_hz / kHzPerMHz;
    backhaul_total_ = s.radio.b_s_total_hz / kHzPerMHz;
    n_ues_ = s.n_ues();
  }

  int dim() const { return static_cast<int>(vars_.size()); }
  int n_constraints() const { return n_ues_ + 1 + (has_backhaul_ ? 1 : 0); }
  const std::vector<Var>& vars() const { return vars_; }
  double floor() const { return floor_; }
  const std::vector<double>& fixed_latency() const { return fixed_; }

  double objective(const VectorXd& u) const {
    double f = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const Var& v = vars_[i];
      if (v.k_energy != 0.0) f += v.k_energy * inv_rate(u[i], v.c).q;
      const double d = u[i] - v.target;
      f += 0.5 * rho_ * d * d;
    }
    return f;
  }

  void objective_derivs(const VectorXd& u, VectorXd& grad, VectorXd& hess_diag) const {
    grad.setZero(dim());
    hess_diag.setZero(dim());
    for (int i = 0; i < dim(); ++i) {
      const Var& v = vars_[i];
      if (v.k_energy != 0.0) {
        const InvRate ir = inv_rate(u[i], v.c);
        grad[i] += v.k_energy * ir.dq;
        hess_diag[i] += v.k_energy * ir.d2q;
      }
      grad[i] += rho_ * (u[i] - v.target);
      hess_diag[i] += rho_;
    }
  }

  // Scaled constraint values g <= 0, Jacobian rows and Hessian diagonals.
  void constraints(const VectorXd& u, VectorXd& g, MatrixXd* jac, MatrixXd* hdiag) const {
    const int m = n_constraints();
    g.setZero(m);
    if (jac) jac->setZero(m, dim());
    if (hdiag) hdiag->setZero(m, dim());
    for (int n = 0; n < n_ues_; ++n) g[n] = fixed_[n] - t_th_;
    double access = 0.0;
    double backhaul = 0.0;
    for (int i = 0; i < dim(); ++i) {
      const Var& v = vars_[i];
      const InvRate ir = inv_rate(u[i], v.c);
      g[v.ue] += v.k_lat * ir.q;
      if (jac) (*jac)(v.ue, i) = v.k_lat * ir.dq / t_th_;
      if (hdiag) (*hdiag)(v.ue, i) = v.k_lat * ir.d2q / t_th_;
      if (v.access) {
        access += u[i];
        if (jac) (*jac)(n_ues_, i) = 1.0 / access_total_;
      } else {
        backhaul += u[i];
        if (jac) (*jac)(n_ues_ + 1, i) = 1.0 / backhaul_total_;
      }
    }
    for (int n = 0; n < n_ues_; ++n) g[n] /= t_th_;
    g[n_ues_] = (access - access_total_) / access_total_;
    if (has_backhaul_) g[n_ues_ + 1] = (backhaul - backhaul_total_) / backhaul_total_;
  }

  VectorXd equal_split() const {
    int n_back = 0;
    for (const auto& v : vars_) n_back += !v.access;
    VectorXd u(dim());
    for (int i = 0; i < dim(); ++i)
      u[i] = vars_[i].access ? access_total_ / n_ues_ : backhaul_total_ / std::max(1, n_back);
    return u;
  }

  bool strictly_feasible(const VectorXd& u) const {
    if ((u.array() <= floor_).any()) return false;
    VectorXd g;
    constraints(u, g, nullptr, nullptr);
    return (g.array() < 0.0).all();
  }

 private:
  std::vector<Var> vars_;
  std::vector<double> fixed_;
  double rho_;
  double floor_;
  double t_th_;
  double access_total_ = 0.0;
  double backhaul_total_ = 0.0;
  bool has_backhaul_ = false;
  int n_ues_ = 0;
};

// Barrier function for phase II (z = u) or phase I (z = (u, s)).
struct Barrier {
  const Program& p;
  bool phase1;

  int dim() const { return p.dim() + (phase1 ? 1 : 0); }
  int n_terms() const { return p.n_constraints() + p.dim(); }

  bool in_domain(const VectorXd& z) const {
    const VectorXd u = z.head(p.dim());
    if (!((u.array() > p.floor()).all())) return false;
    VectorXd g;
    p.constraints(u, g, nullptr, nullptr);
    const double s = phase1 ? z[p.dim()] : 0.0;
    return ((g.array() - s) < 0.0).all() && g.allFinite();
  }

  double value(const VectorXd& z, double t) const {
    const VectorXd u = z.head(p.dim());
    VectorXd g;
    p.constraints(u, g, nullptr, nullptr);
    const double s = phase1 ? z[p.dim()] : 0.0;
    double phi = phase1 ? t * s : t * p.objective(u);
    for (Eigen::Index i = 0; i < g.size(); ++i) phi -= std::log(s - g[i]);
    for (int i = 0; i < p.dim(); ++i) phi -= std::log(u[i] - p.floor());
    return phi;
  }

  void derivs(const VectorXd& z, double t, VectorXd& grad, MatrixXd& hess) const {
    const int d = p.dim();
    const VectorXd u = z.head(d);
    grad.setZero(dim());
    hess.setZero(dim(), dim());
    if (phase1) {
      grad[d] = t;
    } else {
      VectorXd fg, fh;
      p.objective_derivs(u, fg, fh);
      grad.head(d) = t * fg;
      hess.topLeftCorner(d, d).diagonal() = t * fh;
    }
    VectorXd g;
    MatrixXd jac, hdiag;
    p.constraints(u, g, &jac, &hdiag);
    const double s = phase1 ? z[d] : 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      const double slack = s - g[i];
      VectorXd a = VectorXd::Zero(dim());
      a.head(d) = jac.row(i).transpose();
      if (phase1) a[d] = -1.0;
      grad += a / slack;
      hess += a * a.transpose() / (slack * slack);
      hess.topLeftCorner(d, d).diagonal() += hdiag.row(i).transpose() / slack;
    }
    for (int i = 0; i < d; ++i) {
      const double w = u[i] - p.floor();
      grad[i] -= 1.0 / w;
      hess(i, i) += 1.0 / (w * w);
    }
  }
};

// Damped Newton centering. Returns the number of iterations taken.
int center(const Barrier& b, VectorXd& z, double t, const BarrierSettings& st, double phase1_stop) {
  VectorXd grad;
  MatrixXd hess;
  int it = 0;
  int extra = 0;
  for (; it < st.max_newton_iters; ++it) {
    b.derivs(z, t, grad, hess);
    Eigen::LDLT<MatrixXd> ldlt(hess);
    VectorXd dz = -ldlt.solve(grad);
    if (!dz.allFinite()) break;
    const double dec = -grad.dot(dz);
    if (dec < 0.0) dz = -grad;
    double alpha = 1.0;
    while (alpha > 1e-14 && !b.in_domain(z + alpha * dz)) alpha *= 0.5;
    if (std::abs(dec) > 0.25 || alpha < 1.0) {
      // Damped phase; inside the quadratic region the full step is taken
      // because barrier values lose their resolution at large t.
      const double phi0 = b.value(z, t);
      const double slope = grad.dot(dz);
      while (alpha > 1e-14 && b.value(z + alpha * dz, t) > phi0 + 0.25 * alpha * slope) alpha *= 0.5;
    }
    if (alpha <= 1e-14) break;
    z += alpha * dz;
    if (b.phase1 && z[b.p.dim()] < phase1_stop) {
      ++it;
      break;
    }
    if (std::abs(dec) / 2.0 <= st.newton_tol) {
      // Keep iterating while the step still buys quadratic progress; one
      // step past the tolerance is cheap and tightens stationarity.
      if (std::abs(dec) / 2.0 <= st.newton_tol * 1e-6 || ++extra > 2) {
        ++it;
        break;
      }
    }
  }
  return it;
}

struct PhaseOne {
  VectorXd u;
  double worst = kInf;  // min over u of the max scaled violation
  int newton = 0;
};

PhaseOne phase_one(const Program& p, const VectorXd& u0, const BarrierSettings& st) {
  const Barrier b{p, true};
  VectorXd z(b.dim());
  z.head(p.dim()) = u0.cwiseMax(p.floor() * 2.0 + 1e-9);
  VectorXd g;
  p.constraints(z.head(p.dim()), g, nullptr, nullptr);
  z[p.dim()] = g.maxCoeff() + 1.0;
  PhaseOne out;
  double t = st.t0;
  const double stop = -0.01;
  for (int outer = 0; outer < st.outer_iters; ++outer) {
    out.newton += center(b, z, t, st, stop);
    if (z[p.dim()] < stop) break;
    if (b.n_terms() / t < 1e-10) break;
    t *= st.mu;
  }
  out.u = z.head(p.dim());
  p.constraints(out.u, g, nullptr, nullptr);
  out.worst = g.maxCoeff();
  return out;
}

struct PhaseTwo {
  VectorXd u;
  SolveStats stats;
};

PhaseTwo phase_two(const Program& p, VectorXd u, const BarrierSettings& st) {
  const Barrier b{p, false};
  PhaseTwo out;
  double t = st.t0;
  int outer = 0;
  for (; outer < st.outer_iters; ++outer) {
    out.stats.newton_iters += center(b, u, t, st, 0.0);
    const double scale = std::max(std::abs(p.objective(u)), 1e-6);
    if (b.n_terms() / t <= st.gap_tol * scale) break;
    t *= st.mu;
  }
  out.stats.outer_iters = outer + 1;
  out.u = u;
  out.stats.objective = p.objective(u);

  // KKT certificate: multipliers of the near-active constraints fitted by
  // non-negative least squares against the objective gradient.
  VectorXd fg, fh, g;
  MatrixXd jac;
  p.objective_derivs(u, fg, fh);
  p.constraints(u, g, &jac, nullptr);
  std::vector<VectorXd> cols;
  std::vector<double> slacks;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (-g[i] <= 1e-6) {
      cols.push_back(jac.row(i).transpose());
      slacks.push_back(-g[i]);
    }
  }
  for (int i = 0; i < p.dim(); ++i) {
    if (u[i] - p.floor() <= 1e-6) {
      cols.push_back(-VectorXd::Unit(p.dim(), i));
      slacks.push_back(u[i] - p.floor());
    }
  }
  std::vector<bool> keep(cols.size(), true);
  VectorXd stat = fg;
  double comp = 0.0;
  for (int pass = 0; pass <= static_cast<int>(cols.size()); ++pass) {
    std::vector<int> idx;
    for (std::size_t c = 0; c < cols.size(); ++c)
      if (keep[c]) idx.push_back(static_cast<int>(c));
    stat = fg;
    comp = 0.0;
    if (idx.empty()) break;
    MatrixXd a(p.dim(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) a.col(static_cast<Eigen::Index>(c)) = cols[idx[c]];
    const VectorXd lam = a.colPivHouseholderQr().solve(-fg);
    Eigen::Index worst;
    if (lam.size() && lam.minCoeff(&worst) < 0.0) {
      keep[idx[worst]] = false;
      continue;
    }
    stat += a * lam;
    for (std::size_t c = 0; c < idx.size(); ++c) comp = std::max(comp, std::abs(lam[c] * slacks[idx[c]]));
    break;
  }
  out.stats.kkt_residual = stat.cwiseAbs().maxCoeff() / std::max(fg.cwiseAbs().maxCoeff(), 1e-300);
  out.stats.complementarity = comp;
  return out;
}

std::optional<Infeasibility> precheck(const Assignment& x, const Scenario& s) {
  for (int j = 0; j < s.n_sats(); ++j) {
    const double e = sat_compute_energy(j, x, s);
    if (e > s.compute.e_th_j[j]) {
      std::ostringstream os;
      os << "satellite " << j << " needs " << e << " J of compute energy, budget " << s.compute.e_th_j[j] << " J";
      return Infeasibility{"sat_energy", (e - s.compute.e_th_j[j]) / s.compute.e_th_j[j], os.str()};
    }
  }
  const Program p(x, s, 0.0, nullptr, false, 1.0);
  for (int n = 0; n < s.n_ues(); ++n) {
    const double fixed = p.fixed_latency()[n];
    if (fixed >= s.compute.t_th_s) {
      std::ostringstream os;
      os << "UE " << n << " needs " << fixed << " s before transmission, budget " << s.compute.t_th_s << " s";
      return Infeasibility{"latency", (fixed - s.compute.t_th_s) / s.compute.t_th_s, os.str()};
    }
  }
  return std::nullopt;
}

Outcome<VectorXd> strict_start(const Program& p, const BarrierSettings& st, int* newton) {
  const VectorXd u0 = p.equal_split() * (1.0 - 1e-3);
  if (p.strictly_feasible(u0)) return u0;
  const PhaseOne ph = phase_one(p, u0, st);
  if (newton) *newton += ph.newton;
  if (ph.worst < -1e-10 && p.strictly_feasible(ph.u)) return ph.u;
  return Infeasibility{"latency", std::max(ph.worst, 0.0), "no bandwidth split meets every latency budget"};
}

VectorXd active_values(const Program& p, const BandwidthPlan& plan) {
  const VectorXd flat = plan.flat_b();
  VectorXd u(p.dim());
  for (int i = 0; i < p.dim(); ++i) u[i] = flat[p.vars()[i].slot] / kHzPerMHz;
  return u;
}

void write_active(const Program& p, const VectorXd& u, VectorXd& flat_hz) {
  for (int i = 0; i < p.dim(); ++i) flat_hz[p.vars()[i].slot] = u[i] * kHzPerMHz;
}

}  // namespace

BandwidthPlan equal_split(const Assignment& x, const Scenario& s) {
  BandwidthPlan plan = BandwidthPlan::zeros(s.n_ues(), s.n_servers());
  int n_sat_ues = 0;
  for (int n = 0; n < s.n_ues(); ++n) n_sat_ues += x.server[n] != s.bs_index();
  for (int n = 0; n < s.n_ues(); ++n) {
    const int j = x.server[n];
    plan.b_access(n, j) = s.radio.b_access_total_hz / s.n_ues();
    if (j != s.bs_index()) plan.b_s(n, j) = s.radio.b_s_total_hz / n_sat_ues;
  }
  plan.xi = plan.flat_b();
  return plan;
}

Outcome<BandwidthPlan> feasible_init(const Assignment& x, const Scenario& s, const BarrierSettings& settings) {
  if (auto why = precheck(x, s)) return *why;
  BandwidthPlan plan = equal_split(x, s);
  const ConstraintResiduals r = residuals(x, plan, s);
  if ((r.latency.array() <= 0.0).all()) return plan;
  const Program p(x, s, 0.0, nullptr, false, settings.floor_hz);
  Outcome<VectorXd> u = strict_start(p, settings, nullptr);
  if (!u.ok()) return u.infeasibility();
  VectorXd flat = VectorXd::Zero(plan.flat_size());
  write_active(p, *u, flat);
  plan.set_flat_b(flat);
  plan.xi = flat;
  return plan;
}

Outcome<BUpdate> solve_B_subproblem(const Assignment& x, const BandwidthPlan& plan, const Scenario& s, double rho,
                                    const BarrierSettings& settings) {
  if (!(rho >= 0.0)) throw std::invalid_argument("solve_B_subproblem: rho must be non-negative");
  if (auto why = precheck(x, s)) return *why;
  const VectorXd targets = plan.xi + plan.varpi;
  const Program p(x, s, rho, &targets, false, settings.floor_hz);

  int newton = 0;
  const VectorXd old_u = active_values(p, plan);
  VectorXd start;
  if (p.strictly_feasible(old_u)) {
    start = old_u;
  } else {
    Outcome<VectorXd> u = strict_start(p, settings, &newton);
    if (!u.ok()) return u.infeasibility();
    start = *u;
  }
  PhaseTwo sol = phase_two(p, start, settings);
  sol.stats.newton_iters += newton;

  if (p.strictly_feasible(old_u) && p.objective(old_u) < sol.stats.objective) {
    sol.u = old_u;
    sol.stats.objective = p.objective(old_u);
  }

  BUpdate out{plan, sol.stats};
  VectorXd flat = targets.cwiseMax(0.0);
  write_active(p, sol.u, flat);
  out.plan.set_flat_b(flat);
  return out;
}

double xi_coordinate(double k, double c, double rho, double target) {
  if (!(rho > 0.0)) throw std::invalid_argument("xi_coordinate: rho must be positive");
  if (k == 0.0) return std::max(0.0, target);
  auto h = [&](double v) {
    const InvRate ir = inv_rate(v, c);
    return k * ir.dq + rho * (v - target);
  };
  auto dh = [&](double v) { return k * inv_rate(v, c).d2q + rho; };

  double lo = 1e-9 * std::max(1.0, std::abs(target));
  while (h(lo) >= 0.0 && lo > 1e-300) lo *= 1e-3;
  double hi = std::max(target, 1.0);
  while (h(hi) <= 0.0) hi *= 2.0;

  double v = std::clamp(std::max(target, lo), lo, hi);
  const double scale = rho * std::max(1.0, std::abs(target)) + std::abs(k * inv_rate(hi, c).dq);
  for (int it = 0; it < 200; ++it) {
    const double hv = h(v);
    if (std::abs(hv) <= 1e-12 * scale) break;
    if (hv < 0.0) lo = v; else hi = v;
    double next = v - hv / dh(v);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * hi) break;
    v = next;
  }
  return v;
}

BandwidthPlan solve_xi_subproblem(const Assignment& x, const BandwidthPlan& plan, const Scenario& s, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("solve_xi_subproblem: rho must be positive");
  BandwidthPlan out = plan;
  const VectorXd b = plan.flat_b();
  out.xi = (b - plan.varpi).cwiseMax(0.0);
  const LinkModel link(s);
  const int bs = s.bs_index();
  for (int n = 0; n < s.n_ues(); ++n) {
    if (x.server[n] != bs) continue;
    const Eigen::Index k = plan.access_slot(n, bs);
    const double coeff = s.topology.task_bits[n] * s.radio.p_ue_w(n) / kHzPerMHz;
    const double target = (b[k] - plan.varpi[k]) / kHzPerMHz;
    out.xi[k] = xi_coordinate(coeff, link.access_c(n) / kHzPerMHz, rho, target) * kHzPerMHz;
  }
  return out;
}

BandwidthPlan update_varpi(const BandwidthPlan& plan) {
  BandwidthPlan out = plan;
  out.varpi = plan.varpi - (plan.flat_b() - plan.xi);
  return out;
}

Outcome<FixedAssignmentSolution> solve_given_assignment(const Assignment& x, const Scenario& s,
                                                        const BarrierSettings& settings) {
  if (auto why = precheck(x, s)) return *why;
  const Program p(x, s, 0.0, nullptr, true, settings.floor_hz);
  int newton = 0;
  Outcome<VectorXd> start = strict_start(p, settings, &newton);
  if (!start.ok()) return start.infeasibility();
  PhaseTwo sol = phase_two(p, *start, settings);
  sol.stats.newton_iters += newton;

  FixedAssignmentSolution out;
  out.plan = BandwidthPlan::zeros(s.n_ues(), s.n_servers());
  VectorXd flat = VectorXd::Zero(out.plan.flat_size());
  write_active(p, sol.u, flat);
  out.plan.set_flat_b(flat);
  out.plan.xi = flat;
  out.energy = total_energy(x, out.plan, s, false);
  out.stats = sol.stats;
  return out;
}

}  // namespace satedge
