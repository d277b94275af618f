#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "pdopt/common.hpp"
#include "pdopt/diagnostics.hpp"
#include "pdopt/problems.hpp"
#include "pdopt/schedules.hpp"
#include "pdopt/solvers.hpp"

namespace pdopt {

// Per-iteration diagnostics row. CSV column order is fixed:
// t,a_t,lyap,lag_gap,primal_gap,dist_z_sq,dist_v_sq,feas_sq,ineq_slack
struct TraceRecord {
  long t = 0;
  double a_t = kNaN;
  double lyap = kNaN;
  double lag_gap = kNaN;
  double primal_gap = kNaN;
  double dist_z_sq = kNaN;
  double dist_v_sq = kNaN;
  double feas_sq = kNaN;
  double ineq_slack = kNaN;
};

enum class CheckLevel { off, lyapunov, full_inequality };
enum class StopRule { none, fixed_iters, gap_below };

struct SolveConfig {
  double gamma = 0.0;
  double tau = 0.0;
  std::optional<MomentumSchedule> schedule;  // default: constant_one
  long max_iters = 1000;
  StopRule stop = StopRule::fixed_iters;
  double stop_eps = 0.0;
  CheckLevel check_level = CheckLevel::lyapunov;
  bool strict = false;
  bool final_pgd_polish = false;  // one trailing PGD step after APGD
  bool simplified_affine_dual = true;
  // keep the iterate history: x, z, v always; y, z_hat, u only when
  // check_level != off. Off by default: certificates are checked inline,
  // so long runs need not hold their trajectory.
  bool store_states = false;
  Vec x0, u0;  // empty -> zeros
};

struct RunResult {
  std::vector<TraceRecord> records;  // records[t] is iteration t (t = 0 first)
  std::vector<SolverState> states;   // populated when cfg.store_states
  SolverState final_state;
  double e0 = kNaN;  // initial Lyapunov value
  bool lyapunov_monotone = true;
  bool certificates_ok = true;
  double min_slack_rel = kInf;  // min over iterations of slack / scale
  long iters = 0;
  long gap_hit_iter = -1;  // first t with gap <= stop_eps (gap_below)
  // max of a_{t+1} ||y^t - x^t|| = ||x^t - z^t|| over early/late iterations
  double yx_bound_early = 0.0;
  double yx_bound_late = 0.0;
  double wall_seconds = 0.0;
};

namespace detail {

// Psi(x) - Psi* in centered form; +inf when x infeasible for g or h.
inline double psi_gap_centered(const ProblemInstance& P, const Vec& x) {
  const Vec d = x - P.ref.x_star;
  double v = P.f.bregman(x, P.ref.x_star, P.ref.grad_f_star) +
             0.5 * P.mu_g * d.squaredNorm() +
             d.dot(P.ref.grad_f_star + P.mu_g * P.ref.x_star);
  if (P.g) {
    const ExtReal gd = P.g->eval_diff(x, P.ref.x_star);
    if (!gd.is_finite()) return kInf;
    v += gd.value();
  }
  if (P.h && P.K) {
    const ExtReal hd =
        P.h->eval_diff(P.K->apply(x), P.K->apply(P.ref.x_star));
    if (!hd.is_finite()) return kInf;
    v += hd.value();
  }
  return v;
}

inline bool is_primal_alg(Algorithm a) {
  return a == Algorithm::pgd || a == Algorithm::apgd || a == Algorithm::fista;
}

inline void validate_run(Algorithm alg, const ProblemInstance& P,
                         const SolveConfig& cfg) {
  const double slack = 1.0 + 1e-12;
  const double L = P.f.lipschitz_L;
  auto fail = [&](const std::string& m) {
    throw ConfigError(std::string(algorithm_name(alg)) + ": " + m);
  };
  if (cfg.gamma <= 0.0) fail("gamma must be > 0");
  if (cfg.max_iters < 0) fail("max_iters must be >= 0");

  const bool needs_dual = !is_primal_alg(alg);
  if (needs_dual) {
    if (!P.h || !P.K) fail("needs h and K");
    if (cfg.tau <= 0.0) fail("tau must be > 0");
  } else if (P.h || P.K) {
    fail("primal algorithm on a composite instance");
  }

  const double ktk = needs_dual ? P.kb.op_norm_sq : 0.0;
  switch (alg) {
    case Algorithm::pgd:
      if (cfg.gamma >= 2.0 / L * slack) fail("needs gamma < 2/L_f");
      break;
    case Algorithm::apgd:
    case Algorithm::fista:
      if (cfg.gamma > slack / L)
        fail("needs gamma <= 1/L_f (gamma = " + std::to_string(cfg.gamma) +
             ", 1/L_f = " + std::to_string(1.0 / L) + ")");
      break;
    case Algorithm::papc:
      if (cfg.gamma >= 2.0 / L * slack) fail("needs gamma < 2/L_f");
      if (cfg.gamma * cfg.tau * ktk > slack)
        fail("needs gamma*tau*||K||^2 <= 1");
      break;
    case Algorithm::cv:
      if (cfg.gamma * (L / 2.0 + cfg.tau * ktk) > slack)
        fail("needs gamma*(L_f/2 + tau*||K||^2) <= 1");
      break;
    case Algorithm::apapc: {
      if (P.g) fail("general nonsmooth g unsupported; quadratic scaling only");
      const Regime reg =
          cfg.schedule ? cfg.schedule->regime() : Regime::constant_one;
      const bool bc = reg == Regime::regB || reg == Regime::regB_capped ||
                      reg == Regime::regC || reg == Regime::regC_capped;
      if (bc) {
        if (cfg.gamma > slack / (2.0 * L)) fail("needs gamma <= 1/(2 L_f)");
      } else if (cfg.gamma > slack / L) {
        fail("needs gamma <= 1/L_f");
      }
      const double a0 = cfg.schedule ? cfg.schedule->a0() : 1.0;
      if (cfg.gamma * cfg.tau * ktk >
          (1.0 + a0 * cfg.gamma * P.mu_g) * slack)
        fail("needs gamma*tau*||K||^2 <= 1 + a_0*gamma*mu_g (" +
             std::to_string(cfg.gamma * cfg.tau * ktk) + " > " +
             std::to_string(1.0 + a0 * cfg.gamma * P.mu_g) + ")");
      break;
    }
  }

  if (cfg.schedule) {
    const Regime reg = cfg.schedule->regime();
    const bool apgd_reg = reg == Regime::apgd_sublinear ||
                          reg == Regime::apgd_capped ||
                          reg == Regime::constant_one;
    if ((alg == Algorithm::apgd || alg == Algorithm::fista) && !apgd_reg)
      fail("schedule regime incompatible with a primal algorithm");
    if (alg == Algorithm::apapc && (reg == Regime::apgd_sublinear ||
                                    reg == Regime::apgd_capped))
      fail("APGD schedule regime on APAPC");
  } else if (alg == Algorithm::apgd || alg == Algorithm::fista ||
             alg == Algorithm::apapc) {
    fail("momentum schedule required");
  }
}

// PAPC has no g slot; a quadratic scaling term is folded into the smooth
// part (L grows by mu_g).
inline SmoothTerm fold_quadratic(const SmoothTerm& f, double mu_g) {
  if (mu_g == 0.0) return f;
  SmoothTerm out;
  out.kind = SmoothTerm::Kind::custom;
  out.dim = f.dim;
  out.lipschitz_L = f.lipschitz_L + mu_g;
  out.strong_mu = f.strong_mu + mu_g;
  const SmoothTerm base = f;  // owned copy, captured by value
  out.custom_eval = [base, mu_g](const Vec& x) {
    return base.eval(x) + 0.5 * mu_g * x.squaredNorm();
  };
  out.custom_grad = [base, mu_g](const Vec& x) -> Vec {
    return base.grad(x) + mu_g * x;
  };
  return out;
}

}  // namespace detail

// Executes up to max_iters iterations, evaluating diagnostics per
// check_level at every iteration. Deterministic given config and problem.
// Under strict mode a certificate violation aborts with a VerificationError
// naming the iteration.
inline RunResult run(Algorithm alg, const ProblemInstance& P,
                     const SolveConfig& cfg_in) {
  SolveConfig cfg = cfg_in;
  detail::validate_run(alg, P, cfg);
  const auto t_start = std::chrono::steady_clock::now();

  const Index n = P.f.dim > 0 ? P.f.dim : P.ref.x_star.size();
  const bool dual = !detail::is_primal_alg(alg);
  Vec x0 = cfg.x0.size() ? cfg.x0 : Vec(Vec::Zero(n));
  if (x0.size() != n) throw ConfigError("x0 dimension mismatch");

  SolverState s;
  if (dual) {
    Vec u0 = cfg.u0.size() ? cfg.u0 : Vec(Vec::Zero(P.K->rows()));
    if (u0.size() != P.K->rows()) throw ConfigError("u0 dimension mismatch");
    s = SolverState::primal_dual(std::move(x0), std::move(u0));
  } else {
    s = SolverState::primal(std::move(x0));
  }

  const bool uses_momentum = alg == Algorithm::apgd ||
                             alg == Algorithm::fista ||
                             alg == Algorithm::apapc;
  MomentumSchedule sched =
      uses_momentum && cfg.schedule
          ? *cfg.schedule
          : MomentumSchedule(Regime::constant_one, ScheduleParams{});
  const CompositeG g = P.g_slot();
  const SmoothTerm f_papc = alg == Algorithm::papc
                                ? detail::fold_quadratic(P.f, P.mu_g)
                                : SmoothTerm{};
  const double mu_hc = P.h ? P.h->strong_mu_conj : 0.0;
  const Vec* b_feas =
      (P.tag == RegimeTag::regC && P.h) ? &P.h->center : nullptr;
  const bool do_lyap = cfg.check_level != CheckLevel::off;
  const bool do_slack = cfg.check_level == CheckLevel::full_inequality &&
                        (alg == Algorithm::apgd || alg == Algorithm::apapc);

  RunResult R;
  R.records.reserve(static_cast<size_t>(cfg.max_iters) + 2);

  double a_prev = sched.next();  // a_0
  s.a = a_prev;

  auto gap_of = [&](const SolverState& st) {
    if (dual) return lagrangian_gap(P.ref, st.x, st.u, P.f, P.mu_g, *P.h, *P.K);
    return primal_gap(P.f, g, P.ref, st.x);
  };
  auto lyap_of = [&](const SolverState& st, double a_t, double gap) {
    if (detail::is_primal_alg(alg))
      return lyapunov_apgd(cfg.gamma, P.mu_g, a_t,
                           (st.z - P.ref.x_star).squaredNorm(), gap);
    if (alg != Algorithm::apapc) return kNaN;
    const double dz = (st.z - P.ref.x_star).squaredNorm();
    const double dv = (st.v - P.ref.u_star).squaredNorm();
    const double kdv = P.K->adjoint_apply(st.v - P.ref.u_star).squaredNorm();
    switch (P.tag) {
      case RegimeTag::regS:
        return lyapunov_regS(cfg.gamma, cfg.tau, P.mu_g, mu_hc, a_t, dz, dv,
                             kdv, gap).value;
      case RegimeTag::regB:
        return lyapunov_regBC(cfg.gamma, cfg.tau, P.mu_g, P.kb.lam_min,
                              P.f.lipschitz_L, a_t, dz, dv, kdv, gap).value;
      case RegimeTag::regC:
        return lyapunov_regBC(cfg.gamma, cfg.tau, P.mu_g, P.kb.lam_min_plus,
                              P.f.lipschitz_L, a_t, dz, dv, kdv, gap,
                              (P.K->apply(st.x) - *b_feas).squaredNorm()).value;
      default:
        return kNaN;
    }
  };
  auto make_record = [&](const SolverState& st, double a_t, double gap,
                         double lyap, double slack) {
    TraceRecord r;
    r.t = st.t;
    r.a_t = a_t;
    r.lag_gap = gap;
    r.primal_gap = dual ? detail::psi_gap_centered(P, st.x) : gap;
    if (std::isinf(r.primal_gap)) r.primal_gap = kNaN;
    if (std::isinf(r.lag_gap)) r.lag_gap = kNaN;
    r.dist_z_sq = (st.z - P.ref.x_star).squaredNorm();
    r.dist_v_sq = dual ? (st.v - P.ref.u_star).squaredNorm() : kNaN;
    r.feas_sq = b_feas ? (P.K->apply(st.x) - *b_feas).squaredNorm() : kNaN;
    r.lyap = lyap;
    r.ineq_slack = slack;
    return r;
  };

  auto keep_state = [&](const SolverState& st) {
    if (!cfg.store_states) return;
    SolverState kept;
    kept.t = st.t;
    kept.a = st.a;
    kept.x = st.x;
    kept.z = st.z;
    kept.has_dual = st.has_dual;
    if (st.has_dual) kept.v = st.v;
    if (cfg.check_level != CheckLevel::off && st.has_aux) {
      kept.y = st.y;
      kept.z_hat = st.z_hat;
      kept.u = st.u;
      kept.conj_subgrad = st.conj_subgrad;
      kept.has_aux = true;
    }
    R.states.push_back(std::move(kept));
  };

  double gap = gap_of(s);
  double lyap = do_lyap ? lyap_of(s, a_prev, gap) : kNaN;
  R.e0 = lyap;
  R.records.push_back(make_record(s, a_prev, gap, lyap, kNaN));
  keep_state(s);
  double lyap_prev = lyap;

  for (long it = 0; it < cfg.max_iters; ++it) {
    const double a_next = sched.next();
    const SolverState prev = s;
    switch (alg) {
      case Algorithm::pgd:
        step_pgd(s, P.f, g, cfg.gamma);
        break;
      case Algorithm::apgd:
        step_apgd(s, P.f, g, cfg.gamma, a_next);
        break;
      case Algorithm::fista:
        step_fista(s, P.f, g, cfg.gamma, a_prev, a_next);
        break;
      case Algorithm::papc:
        step_papc(s, f_papc, *P.h, *P.K, cfg.gamma, cfg.tau);
        break;
      case Algorithm::cv:
        step_cv(s, P.f, g, *P.h, *P.K, cfg.gamma, cfg.tau);
        break;
      case Algorithm::apapc:
        step_apapc(s, P.f, P.mu_g, *P.h, *P.K, cfg.gamma, cfg.tau, a_next,
                   cfg.simplified_affine_dual);
        break;
    }

    const double q = (prev.x - prev.z).norm();  // = a_{t+1} ||y^t - x^t||
    if (prev.t < 100)
      R.yx_bound_early = std::max(R.yx_bound_early, q);
    else
      R.yx_bound_late = std::max(R.yx_bound_late, q);

    const double gap_next = gap_of(s);
    double slack = kNaN;
    if (do_slack) {
      StepCertificate c;
      if (alg == Algorithm::apgd) {
        c = check_step_inequality_apgd(prev, s, P.ref, P.f, g, cfg.gamma,
                                       a_next, gap, gap_next);
        R.min_slack_rel =
            std::min(R.min_slack_rel, c.slack / certificate_scale(c.lhs, c.rhs));
        if (!slack_ok(c.slack, c.lhs, c.rhs, 1e-8)) {
          R.certificates_ok = false;
          if (cfg.strict)
            throw VerificationError(
                "per-step certificate violated at iteration " +
                std::to_string(s.t) + " (slack " + std::to_string(c.slack) +
                ")");
        }
      } else {
        c = check_step_inequality_apapc(prev, s, P.ref, P.f, P.mu_g, *P.h,
                                        *P.K, cfg.gamma, cfg.tau, a_next, gap,
                                        gap_next);
        R.min_slack_rel =
            std::min(R.min_slack_rel, c.slack / certificate_scale(c.lhs, c.rhs));
        if (!slack_ok(c.slack, c.lhs, c.rhs, 1e-7)) {
          R.certificates_ok = false;
          if (cfg.strict)
            throw VerificationError(
                "per-step certificate violated at iteration " +
                std::to_string(s.t) + " (slack " + std::to_string(c.slack) +
                ")");
        }
      }
      slack = c.slack;
    }

    double lyap_next = kNaN;
    if (do_lyap) {
      lyap_next = lyap_of(s, a_next, gap_next);
      if (!std::isnan(lyap_next) && !std::isnan(lyap_prev) &&
          lyap_next > lyap_prev * (1.0 + 1e-9) +
                          1e-12 * (1.0 + std::abs(R.e0))) {
        R.lyapunov_monotone = false;
        if (cfg.strict)
          throw VerificationError("Lyapunov increase at iteration " +
                                  std::to_string(s.t));
      }
      lyap_prev = lyap_next;
    }

    R.records.push_back(make_record(s, a_next, gap_next, lyap_next, slack));
    keep_state(s);
    gap = gap_next;
    a_prev = a_next;
    ++R.iters;

    if (cfg.stop == StopRule::gap_below && gap <= cfg.stop_eps) {
      R.gap_hit_iter = s.t;
      break;
    }
  }

  if (cfg.final_pgd_polish && alg == Algorithm::apgd) {
    step_pgd(s, P.f, g, cfg.gamma);
    const double gp = gap_of(s);
    R.records.push_back(make_record(s, 1.0, gp, kNaN, kNaN));
  }

  R.final_state = std::move(s);
  R.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return R;
}

}  // namespace pdopt
