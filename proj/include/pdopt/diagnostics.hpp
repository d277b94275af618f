#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "pdopt/common.hpp"
#include "pdopt/functions.hpp"
#include "pdopt/linops.hpp"
#include "pdopt/solvers.hpp"

namespace pdopt {

// Saddle point / minimizer reference produced by an independent oracle.
struct ReferencePair {
  Vec x_star;
  Vec u_star;            // empty for primal-only problems
  Vec grad_f_star;       // grad f(x*)
  Vec conj_subgrad_star; // K x*, the subgradient of h* at u*
  double psi_star = 0.0;
  bool has_dual = false;
};

// ---------------------------------------------------------------------------
// Gap evaluation. Everything is computed in centered form: each Bregman
// piece is nonnegative and scales with the distance to the reference, which
// keeps the a_t^2-amplified certificate checks meaningful near convergence.
// ---------------------------------------------------------------------------

// Psi(x) - Psi* = D_f(x) + D_g(x) with the optimality subgradient of g.
// +inf when x is outside dom g.
inline double primal_gap(const SmoothTerm& f, const CompositeG& g,
                         const ReferencePair& ref, const Vec& x) {
  const double df = f.bregman(x, ref.x_star, ref.grad_f_star);
  const double dg = g.bregman(x, ref.x_star, ref.grad_f_star);
  return df + dg;
}

// Lagrangian gap L(x, u*) - L(x*, u) in Bregman form
// (D_f + D_g)(x) + D_{h*}(u); +inf when h*(u) = +inf.
inline double lagrangian_gap(const ReferencePair& ref, const Vec& x,
                             const Vec& u, const SmoothTerm& f, double mu_g,
                             const ProxTerm& h, const LinearMap& /*K*/) {
  const Vec d = x - ref.x_star;
  const double df = f.bregman(x, ref.x_star, ref.grad_f_star);
  const double dg = 0.5 * mu_g * d.squaredNorm();
  const double dh = h.conj_bregman(u, ref.u_star, ref.conj_subgrad_star);
  return df + dg + dh;
}

// Raw Lagrangian difference, kept as a cross-check of the Bregman form.
inline double lagrangian_gap_direct(const ReferencePair& ref, const Vec& x,
                                    const Vec& u, const SmoothTerm& f,
                                    double mu_g, const ProxTerm& h,
                                    const LinearMap& K) {
  const ExtReal hu = h.conj_eval(u);
  if (!hu.is_finite()) return kInf;
  const ExtReal hus = h.conj_eval(ref.u_star);
  const double fg_x = f.eval(x) + 0.5 * mu_g * x.squaredNorm();
  const double fg_s = f.eval(ref.x_star) + 0.5 * mu_g * ref.x_star.squaredNorm();
  const double l_x_us = fg_x + K.apply(x).dot(ref.u_star) - hus.value();
  const double l_xs_u = fg_s + K.apply(ref.x_star).dot(u) - hu.value();
  return l_x_us - l_xs_u;
}

// ---------------------------------------------------------------------------
// Lyapunov functions (arithmetic cores + state-level wrappers)
// ---------------------------------------------------------------------------

inline double lyapunov_apgd(double gamma, double mu_g, double a_t,
                            double dist_z_sq, double psi_gap) {
  return (1.0 + a_t * gamma * mu_g) / (2.0 * gamma) * dist_z_sq +
         a_t * a_t * psi_gap;
}

inline double lyapunov_apgd(const ReferencePair& ref, const SolverState& s,
                            const SmoothTerm& f, const CompositeG& g,
                            double gamma, double a_t) {
  return lyapunov_apgd(gamma, g.mu, a_t, (s.z - ref.x_star).squaredNorm(),
                       primal_gap(f, g, ref, s.x));
}

struct LyapunovTerms {
  double value = 0.0;
  double z_term = 0.0;
  double v_term = 0.0;
  double kstar_term = 0.0;  // enters negatively
  double gap_term = 0.0;
  double feas_term = 0.0;
};

inline LyapunovTerms lyapunov_regS(double gamma, double tau, double mu_g,
                                   double mu_hconj, double a_t,
                                   double dist_z_sq, double dist_v_sq,
                                   double kstar_dv_sq, double gap) {
  LyapunovTerms T;
  T.z_term = (1.0 + a_t * gamma * mu_g) / (2.0 * gamma) * dist_z_sq;
  T.v_term = (a_t * a_t + a_t * tau * mu_hconj) / (2.0 * tau) * dist_v_sq;
  T.kstar_term = a_t * a_t * gamma / (2.0 + 2.0 * a_t * gamma * mu_g) * kstar_dv_sq;
  T.gap_term = a_t * a_t * gap;
  T.value = T.z_term + T.v_term - T.kstar_term + T.gap_term;
  return T;
}

inline LyapunovTerms lyapunov_regS(const ReferencePair& ref,
                                   const SolverState& s, const SmoothTerm& f,
                                   double gamma, double tau, double mu_g,
                                   double mu_hconj, const ProxTerm& h,
                                   const LinearMap& K, double a_t) {
  return lyapunov_regS(gamma, tau, mu_g, mu_hconj, a_t,
                       (s.z - ref.x_star).squaredNorm(),
                       (s.v - ref.u_star).squaredNorm(),
                       K.adjoint_apply(s.v - ref.u_star).squaredNorm(),
                       lagrangian_gap(ref, s.x, s.u, f, mu_g, h, K));
}

// Regime B/C energy; pass feas_sq = ||K x - b||^2 for the constrained case
// (NaN otherwise) and lam = lambda_min or lambda^+_min accordingly.
inline LyapunovTerms lyapunov_regBC(double gamma, double tau, double mu_g,
                                    double lam, double L_f, double a_t,
                                    double dist_z_sq, double dist_v_sq,
                                    double kstar_dv_sq, double gap,
                                    double feas_sq = kNaN) {
  const double delta = std::min(0.5, 1.0 / (2.0 * a_t * gamma * L_f));
  LyapunovTerms T;
  T.z_term = (2.0 + a_t * gamma * mu_g) / (4.0 * gamma) * dist_z_sq;
  T.v_term = (2.0 * a_t * a_t + delta * gamma * tau * a_t * a_t * lam) /
             (4.0 * tau) * dist_v_sq;
  T.kstar_term = a_t * a_t * gamma / (2.0 + 2.0 * a_t * gamma * mu_g) * kstar_dv_sq;
  T.gap_term = a_t * a_t * gap;
  T.feas_term = std::isnan(feas_sq) ? 0.0 : a_t * tau / 2.0 * feas_sq;
  T.value = T.z_term + T.v_term - T.kstar_term + T.gap_term + T.feas_term;
  return T;
}

inline LyapunovTerms lyapunov_regBC(const ReferencePair& ref,
                                    const SolverState& s, const SmoothTerm& f,
                                    double gamma, double tau, double mu_g,
                                    double lam, const ProxTerm& h,
                                    const LinearMap& K, double a_t,
                                    const Vec* b_feas = nullptr) {
  double feas = kNaN;
  if (b_feas) feas = (K.apply(s.x) - *b_feas).squaredNorm();
  return lyapunov_regBC(gamma, tau, mu_g, lam, f.lipschitz_L, a_t,
                        (s.z - ref.x_star).squaredNorm(),
                        (s.v - ref.u_star).squaredNorm(),
                        K.adjoint_apply(s.v - ref.u_star).squaredNorm(),
                        lagrangian_gap(ref, s.x, s.u, f, mu_g, h, K), feas);
}

// ---------------------------------------------------------------------------
// Per-step certificates: slack = RHS - LHS of the single-iteration
// inequality; nonnegative (up to tolerance) certifies the step.
// ---------------------------------------------------------------------------

inline double certificate_scale(double lhs, double rhs) {
  double s = 1.0;
  if (std::isfinite(lhs)) s += std::abs(lhs);
  if (std::isfinite(rhs)) s += std::abs(rhs);
  return s;
}

inline bool slack_ok(double slack, double lhs, double rhs, double tol_rel) {
  if (std::isinf(rhs) && rhs > 0) return true;
  return slack >= -std::max(tol_rel * certificate_scale(lhs, rhs), 1e-12);
}

struct StepCertificate {
  double slack = kNaN;
  double lhs = kNaN;
  double rhs = kNaN;
};

inline StepCertificate check_step_inequality_apgd(
    const SolverState& prev, const SolverState& next, const ReferencePair& ref,
    const SmoothTerm& f, const CompositeG& g, double gamma, double a_next,
    double gap_prev = kNaN, double gap_next = kNaN) {
  if (std::isnan(gap_prev)) gap_prev = primal_gap(f, g, ref, prev.x);
  if (std::isnan(gap_next)) gap_next = primal_gap(f, g, ref, next.x);
  const double mu_f = f.strong_mu;
  const double L_f = f.lipschitz_L;
  const double dz_prev = (prev.z - ref.x_star).squaredNorm();
  const double dz_next = (next.z - ref.x_star).squaredNorm();
  const double dz_step = (next.z - prev.z).squaredNorm();
  const double coef = a_next * a_next - a_next;

  StepCertificate c;
  c.lhs = (1.0 + a_next * gamma * g.mu) / (2.0 * gamma) * dz_next +
          a_next * a_next * gap_next;
  c.rhs = (1.0 - gamma * mu_f) / (2.0 * gamma) * dz_prev -
          (1.0 / (2.0 * gamma) - L_f / 2.0) * dz_step;
  if (coef != 0.0) c.rhs += coef * gap_prev;  // 0 * inf guard at t = 0
  c.slack = c.rhs - c.lhs;
  return c;
}

inline StepCertificate check_step_inequality_apapc(
    const SolverState& prev, const SolverState& next, const ReferencePair& ref,
    const SmoothTerm& f, double mu_g, const ProxTerm& h, const LinearMap& K,
    double gamma, double tau, double a_next, double gap_prev = kNaN,
    double gap_next = kNaN) {
  if (!next.has_aux)
    throw InputError("check_step_inequality_apapc: state lacks y/zhat/subgradient");
  if (std::isnan(gap_prev))
    gap_prev = lagrangian_gap(ref, prev.x, prev.u, f, mu_g, h, K);
  if (std::isnan(gap_next))
    gap_next = lagrangian_gap(ref, next.x, next.u, f, mu_g, h, K);

  const double L_f = f.lipschitz_L;
  const double a2 = a_next * a_next;
  const double kcoef = a2 * gamma / (2.0 + 2.0 * a_next * gamma * mu_g);
  const Vec dz_next = next.z - ref.x_star;
  const Vec dv_next = next.v - ref.u_star;
  const Vec dz_prev = prev.z - ref.x_star;
  const Vec dv_prev = prev.v - ref.u_star;
  const Vec gy = f.grad(next.y);
  const double coef = a2 - a_next;

  StepCertificate c;
  c.lhs = (1.0 + a_next * gamma * mu_g) / (2.0 * gamma) * dz_next.squaredNorm() +
          (a2 + a_next * tau * h.strong_mu_conj) / (2.0 * tau) *
              dv_next.squaredNorm() -
          kcoef * K.adjoint_apply(dv_next).squaredNorm() + a2 * gap_next;
  c.rhs = 1.0 / (2.0 * gamma) * dz_prev.squaredNorm() +
          a2 / (2.0 * tau) * dv_prev.squaredNorm() -
          kcoef * K.adjoint_apply(dv_prev).squaredNorm() -
          (1.0 / (2.0 * gamma) - L_f / 2.0) * (next.z - prev.z).squaredNorm() -
          tau / 2.0 * (K.apply(next.z) - next.conj_subgrad).squaredNorm() -
          a_next / (2.0 * L_f) * (gy - ref.grad_f_star).squaredNorm();
  if (coef != 0.0) {
    c.rhs += coef * gap_prev -
             coef / (2.0 * L_f) * (f.grad(prev.x) - gy).squaredNorm();
  }
  c.slack = c.rhs - c.lhs;
  return c;
}

// ---------------------------------------------------------------------------
// Empirical rate fits
// ---------------------------------------------------------------------------

struct RateFit {
  double sublinear_exponent = kNaN;  // LS slope of log(value) vs log(t)
  double linear_factor = kNaN;       // geometric mean of successive ratios
  long points_exponent = 0;
  long points_factor = 0;
};

// vals[i] corresponds to iteration t = t0 + i. Fits over t in [t_lo, t_hi],
// excluding values at or below the floor 1e2 * eps * (1 + scale).
inline RateFit fit_rate_range(const std::vector<double>& vals, long t0,
                              long t_lo, long t_hi, double scale) {
  const double floor = 1e2 * kEps * (1.0 + std::abs(scale));
  RateFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  double log_ratio_sum = 0;
  long nr = 0;
  for (long t = std::max(t_lo, t0); t <= t_hi; ++t) {
    const size_t i = static_cast<size_t>(t - t0);
    if (i >= vals.size()) break;
    const double v = vals[i];
    if (!(v > floor) || t < 1) continue;
    const double lx = std::log(static_cast<double>(t));
    const double ly = std::log(v);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
    ++n;
    if (i + 1 < vals.size() && t + 1 <= t_hi && vals[i + 1] > floor) {
      log_ratio_sum += std::log(vals[i + 1] / v);
      ++nr;
    }
  }
  if (n >= 10) {
    const double denom = n * sxx - sx * sx;
    if (denom > 0) {
      fit.sublinear_exponent = (n * sxy - sx * sy) / denom;
      fit.points_exponent = n;
    }
  }
  if (nr >= 10) {
    fit.linear_factor = std::exp(log_ratio_sum / static_cast<double>(nr));
    fit.points_factor = nr;
  }
  if (fit.points_exponent == 0 && fit.points_factor == 0)
    throw InsufficientDataError("fit_rate: window entirely excluded");
  return fit;
}

// Last `window` entries of a trace whose values start at iteration t0.
inline RateFit fit_rate(const std::vector<double>& vals, long t0, long window,
                        double scale) {
  if (window < 10 || static_cast<long>(vals.size()) < window)
    throw InsufficientDataError("fit_rate: need trace length >= window >= 10");
  const long t_hi = t0 + static_cast<long>(vals.size()) - 1;
  return fit_rate_range(vals, t0, t_hi - window + 1, t_hi, scale);
}

// Bound checks share one tolerance convention: relative 1e-9 with an
// absolute floor tied to the run's initial energy.
inline bool within_bound(double value, double bound, double energy_scale,
                         double tol_rel = 1e-9) {
  if (std::isinf(bound) && bound > 0) return true;
  return value <= bound * (1.0 + tol_rel) + 1e-12 * (1.0 + std::abs(energy_scale));
}

}  // namespace pdopt
