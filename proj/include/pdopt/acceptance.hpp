#pragma once

#include <chrono>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pdopt/harness.hpp"

// Acceptance suite: one entry per verification criterion, each pinned to its
// stated tolerance and runtime budget. Run via `pdopt verify` or the
// dedicated test binary.

namespace pdopt::acceptance {

enum class Level { fast, full };

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

class Timer {
 public:
  Timer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

inline long cap_reach_index(const std::vector<TraceRecord>& recs,
                            double a_sharp) {
  for (const auto& r : recs)
    if (r.a_t >= a_sharp * (1.0 - 1e-12)) return r.t;
  return -1;
}

struct Check {
  bool pass = true;
  std::string msg;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!msg.empty()) msg += "; ";
      msg += what;
    }
  }
};

// --- criteria 1 + 3 (APGD sublinear bound + per-step certificate) -----------

inline CriterionResult crit1(double* min_slack_out) {
  Timer timer;
  Check ck;
  double worst_rel = kInf;
  double min_slack = kInf;
  for (std::uint64_t seed = 201; seed <= 210; ++seed) {
    ProblemInstance P = gen_lasso_like(50, 60, 0.0, seed);
    const double L = P.f.lipschitz_L;
    const double x0_sq = P.ref.x_star.squaredNorm();  // x0 = 0
    Json cfg = {{"algorithm", "apgd"},
                {"stepsize", {{"gamma", 1.0 / L}}},
                {"schedule", {{"regime", "apgd_sublinear"}, {"linear_form", true}}},
                {"max_iters", 10000},
                {"check_level", "full_inequality"}};
    const ResolvedParams r = resolve_params(Algorithm::apgd, P, cfg);
    const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apgd, P, r);
    RunResult R = run(Algorithm::apgd, P, sc);
    min_slack = std::min(min_slack, R.min_slack_rel);
    for (const auto& rec : R.records) {
      if (rec.t < 1) continue;
      const double bound = 2.0 * L * x0_sq /
                           (static_cast<double>(rec.t + 1) * (rec.t + 1));
      worst_rel = std::min(worst_rel, (bound - rec.primal_gap) / bound);
    }
    ck.require(R.certificates_ok, "certificate violated (seed " +
                                      std::to_string(seed) + ")");
  }
  ck.require(worst_rel >= -1e-9,
             "bound slack " + fmt(worst_rel) + " < -1e-9");
  ck.require(timer.seconds() < 10.0, "runtime over 10 s");
  *min_slack_out = std::min(*min_slack_out, min_slack);
  return {1, "apgd-sublinear-bound",
          ck.pass,
          "min relative bound slack " + fmt(worst_rel) + ", min step slack " +
              fmt(min_slack) + (ck.msg.empty() ? "" : " | " + ck.msg),
          timer.seconds()};
}

// --- criterion 2 (+3) APGD capped linear rate ------------------------------

inline CriterionResult crit2(double* min_slack_out) {
  Timer timer;
  Check ck;
  ProblemInstance P = gen_quadratic_primal(40, 1e4, 2024);
  const double L = P.f.lipschitz_L;
  Json cfg = {{"algorithm", "apgd"},
              {"stepsize", {{"gamma", 1.0 / L}}},
              {"schedule", {{"regime", "apgd_capped"}}},
              {"max_iters", 8000},
              {"check_level", "full_inequality"}};
  const ResolvedParams r = resolve_params(Algorithm::apgd, P, cfg);
  const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apgd, P, r);
  const double a_sharp = sc.schedule->a_sharp();
  RunResult R = run(Algorithm::apgd, P, sc);
  *min_slack_out = std::min(*min_slack_out, R.min_slack_rel);
  ck.require(R.certificates_ok, "certificate violated");

  const long tcap = cap_reach_index(R.records, a_sharp);
  ck.require(tcap >= 0, "cap never reached");
  std::vector<double> lyaps;
  for (const auto& rec : R.records) lyaps.push_back(rec.lyap);
  const double bound = 1.0 / (1.0 + std::sqrt(P.mu_g / L));
  double factor = kNaN;
  if (tcap >= 0) {
    const RateFit fit =
        fit_rate_range(lyaps, 0, tcap, tcap + 500, R.e0);
    factor = fit.linear_factor;
    ck.require(fit.points_factor >= 10, "contraction window too short");
    ck.require(factor <= bound + 0.01,
               "contraction " + fmt(factor) + " > " + fmt(bound + 0.01));
  }
  long hit = -1;
  for (const auto& rec : R.records)
    if (!std::isnan(rec.lyap) && rec.lyap <= 1e-9 * R.e0) {
      hit = rec.t;
      break;
    }
  const double budget = 3.0 * a_sharp * std::log(1e9);
  ck.require(hit >= 0 && static_cast<double>(hit) <= budget,
             "iterations to 1e-9 E0: " + std::to_string(hit) + " > budget " +
                 fmt(budget));
  ck.require(timer.seconds() < 10.0, "runtime over 10 s");
  return {2, "apgd-capped-linear-rate",
          ck.pass,
          "contraction " + fmt(factor) + " vs bound " + fmt(bound) +
              ", hit " + std::to_string(hit) + " budget " + fmt(budget) +
              (ck.msg.empty() ? "" : " | " + ck.msg),
          timer.seconds()};
}

// --- criterion 5 (+4) regime S sublinear ------------------------------------

inline CriterionResult crit5(double* min_slack_out) {
  Timer timer;
  Check ck;
  ProblemInstance P = gen_quadratic_regS(30, 20, 0.0, 1e4, 12345);
  Json cfg = {{"algorithm", "apapc"},
              {"stepsize", {{"rule", "corollary_S"}}},
              {"max_iters", 10000},
              {"check_level", "full_inequality"}};
  const ResolvedParams r = resolve_params(Algorithm::apapc, P, cfg);
  const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apapc, P, r);
  RunResult R = run(Algorithm::apapc, P, sc);
  *min_slack_out = std::min(*min_slack_out, R.min_slack_rel);
  ck.require(R.certificates_ok, "certificate violated");
  ck.require(R.lyapunov_monotone, "Lyapunov not monotone");
  for (const auto& rec : R.records)
    ck.require(within_bound(rec.lag_gap, R.e0 / (rec.a_t * rec.a_t), R.e0),
               "gap bound violated at t=" + std::to_string(rec.t));
  std::vector<double> gaps;
  for (const auto& rec : R.records) gaps.push_back(rec.lag_gap);
  const RateFit fit = fit_rate_range(gaps, 0, 100, 10000, R.e0);
  ck.require(fit.points_exponent >= 10, "exponent window too short");
  ck.require(fit.sublinear_exponent <= -1.9,
             "gap exponent " + fmt(fit.sublinear_exponent) + " > -1.9");
  ck.require(timer.seconds() < 30.0, "runtime over 30 s");
  return {5, "regS-sublinear",
          ck.pass,
          "gap exponent " + fmt(fit.sublinear_exponent) + ", min slack " +
              fmt(R.min_slack_rel) + (ck.msg.empty() ? "" : " | " + ck.msg),
          timer.seconds()};
}

// --- criterion 6 (+4) regime S linear ---------------------------------------

inline CriterionResult crit6(double* min_slack_out) {
  Timer timer;
  Check ck;
  ProblemInstance P = gen_quadratic_regS(30, 20, 0.01, 100.0, 777);
  Json cfg = {{"algorithm", "apapc"},
              {"stepsize", {{"rule", "corollary_S"}}},
              {"max_iters", 3000},
              {"check_level", "full_inequality"}};
  const ResolvedParams r = resolve_params(Algorithm::apapc, P, cfg);
  const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apapc, P, r);
  RunResult R = run(Algorithm::apapc, P, sc);
  *min_slack_out = std::min(*min_slack_out, R.min_slack_rel);
  ck.require(R.certificates_ok, "certificate violated");
  const double L = P.f.lipschitz_L;
  const double mu_hc = P.h->strong_mu_conj;
  const double bound =
      std::max(1.0 / (1.0 + std::sqrt(P.mu_g / L)),
               1.0 / (1.0 + std::sqrt(P.mu_g * mu_hc / P.kb.op_norm_sq)));
  const long tcap = cap_reach_index(R.records, sc.schedule->a_sharp());
  ck.require(tcap >= 0, "cap never reached");
  std::vector<double> lyaps;
  for (const auto& rec : R.records) lyaps.push_back(rec.lyap);
  double factor = kNaN;
  if (tcap >= 0) {
    const RateFit fit = fit_rate_range(lyaps, 0, tcap, tcap + 500, R.e0);
    factor = fit.linear_factor;
    ck.require(fit.points_factor >= 10, "contraction window too short");
    ck.require(factor <= bound + 0.01,
               "contraction " + fmt(factor) + " > " + fmt(bound + 0.01));
  }
  ck.require(timer.seconds() < 30.0, "runtime over 30 s");
  return {6, "regS-linear-rate",
          ck.pass,
          "contraction " + fmt(factor) + " vs bound " + fmt(bound) +
              (ck.msg.empty() ? "" : " | " + ck.msg),
          timer.seconds()};
}

// --- criterion 7 (+4) regime B ----------------------------------------------

inline CriterionResult crit7(double* min_slack_out) {
  Timer timer;
  Check ck;
  std::string detail;
  for (const double nu : {0.5, 1.0}) {
    ProblemInstance P = gen_quadratic_regB(20, 0.0, 1e4, 50.0, 0.25, 4242);
    Json cfg = {{"algorithm", "apapc"},
                {"stepsize", {{"rule", "corollary_B"}, {"nu", nu}}},
                {"schedule", {{"regime", "regB"}}},
                {"max_iters", 10000},
                {"check_level", "full_inequality"}};
    const ResolvedParams r = resolve_params(Algorithm::apapc, P, cfg);
    const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apapc, P, r);
    RunResult R = run(Algorithm::apapc, P, sc);
    *min_slack_out = std::min(*min_slack_out, R.min_slack_rel);
    ck.require(R.certificates_ok,
               "certificate violated (nu=" + fmt(nu) + ")");
    std::vector<double> gaps;
    for (const auto& rec : R.records) gaps.push_back(rec.lag_gap);
    const RateFit fit = fit_rate_range(gaps, 0, 100, 10000, R.e0);
    ck.require(fit.points_exponent >= 10,
               "exponent window too short (nu=" + fmt(nu) + ")");
    ck.require(fit.sublinear_exponent <= -1.9,
               "gap exponent " + fmt(fit.sublinear_exponent) + " > -1.9 (nu=" +
                   fmt(nu) + ")");
    // dual-distance boundedness: q(t) = ||v - u*||^2 * t^p, p = 2 or 1
    const double p = nu < 1.0 ? 2.0 : 1.0;
    double q100 = kNaN, qmax = 0.0;
    for (const auto& rec : R.records) {
      if (rec.t < 100) continue;
      const double q = rec.dist_v_sq * std::pow(static_cast<double>(rec.t), p);
      if (rec.t == 100) q100 = q;
      qmax = std::max(qmax, q);
    }
    ck.require(qmax <= 10.0 * q100,
               "dual bound ratio " + fmt(qmax / q100) + " > 10 (nu=" + fmt(nu) +
                   ")");
    detail += "nu=" + fmt(nu) + ": exponent " + fmt(fit.sublinear_exponent) +
              ", dual ratio " + fmt(qmax / q100) + "  ";
  }
  ck.require(timer.seconds() < 60.0, "runtime over 60 s");
  return {7, "regB-sublinear", ck.pass,
          detail + (ck.msg.empty() ? "" : " | " + ck.msg), timer.seconds()};
}

// --- criterion 8 (+4) regime C ----------------------------------------------

inline CriterionResult crit8(double* min_slack_out) {
  Timer timer;
  Check ck;
  ProblemInstance P = gen_linconstrained(15, 8, 0.0, 999);
  Json cfg = {{"algorithm", "apapc"},
              {"stepsize", {{"rule", "corollary_C"}}},
              {"max_iters", 10000},
              {"check_level", "full_inequality"}};
  const ResolvedParams r = resolve_params(Algorithm::apapc, P, cfg);
  const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apapc, P, r);
  RunResult R = run(Algorithm::apapc, P, sc);
  *min_slack_out = std::min(*min_slack_out, R.min_slack_rel);
  ck.require(P.kb.lam_min == 0.0 && P.kb.lam_min_plus > 0.0,
             "instance is not rank-deficient");
  ck.require(R.certificates_ok, "certificate violated");
  ck.require(R.lyapunov_monotone, "Lyapunov not monotone");
  for (const auto& rec : R.records) {
    ck.require(within_bound(rec.lag_gap, R.e0 / (rec.a_t * rec.a_t), R.e0),
               "gap bound violated at t=" + std::to_string(rec.t));
    ck.require(
        within_bound(rec.feas_sq, 2.0 * R.e0 / (rec.a_t * r.tau), R.e0),
        "feasibility bound violated at t=" + std::to_string(rec.t));
  }
  std::vector<double> feas;
  for (const auto& rec : R.records) feas.push_back(rec.feas_sq);
  const RateFit fit = fit_rate_range(feas, 0, 100, 10000, R.e0);
  ck.require(fit.points_exponent >= 10, "feasibility window too short");
  ck.require(fit.sublinear_exponent <= -0.9,
             "feasibility exponent " + fmt(fit.sublinear_exponent) + " > -0.9");
  ck.require(timer.seconds() < 30.0, "runtime over 30 s");
  return {8, "regC-sublinear",
          ck.pass,
          "feasibility exponent " + fmt(fit.sublinear_exponent) +
              (ck.msg.empty() ? "" : " | " + ck.msg),
          timer.seconds()};
}

// --- criterion 9 (+4) regime C linear ---------------------------------------

inline CriterionResult crit9(double* min_slack_out) {
  Timer timer;
  Check ck;
  ProblemInstance probe = gen_consensus(8, 2, 0.0, 31337);
  const double mu_g = 0.08 * probe.f.lipschitz_L;
  ProblemInstance P = gen_consensus(8, 2, mu_g, 31337);
  Json cfg = {{"algorithm", "apapc"},
              {"stepsize", {{"rule", "corollary_C"}}},
              {"max_iters", 3000},
              {"check_level", "full_inequality"}};
  const ResolvedParams r = resolve_params(Algorithm::apapc, P, cfg);
  const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apapc, P, r);
  RunResult R = run(Algorithm::apapc, P, sc);
  *min_slack_out = std::min(*min_slack_out, R.min_slack_rel);
  ck.require(R.certificates_ok, "certificate violated");
  const double L = P.f.lipschitz_L;
  const double lamp = P.kb.lam_min_plus;
  const double k2 = P.kb.op_norm_sq;
  const double bound =
      std::max(1.0 / (1.0 + std::sqrt(mu_g * lamp / (8.0 * L * k2))),
               1.0 / (1.0 + lamp / (4.0 * k2)));
  const long tcap = cap_reach_index(R.records, sc.schedule->a_sharp());
  ck.require(tcap >= 0, "cap never reached");
  std::vector<double> lyaps;
  for (const auto& rec : R.records) lyaps.push_back(rec.lyap);
  double factor = kNaN;
  if (tcap >= 0) {
    const RateFit fit = fit_rate_range(lyaps, 0, tcap, tcap + 500, R.e0);
    factor = fit.linear_factor;
    ck.require(fit.points_factor >= 10, "contraction window too short");
    ck.require(factor <= bound + 0.01,
               "contraction " + fmt(factor) + " > " + fmt(bound + 0.01));
  }
  ck.require(timer.seconds() < 30.0, "runtime over 30 s");
  return {9, "regC-linear-rate",
          ck.pass,
          "contraction " + fmt(factor) + " vs bound " + fmt(bound) +
              (ck.msg.empty() ? "" : " | " + ck.msg),
          timer.seconds()};
}

// --- criterion 10 reduction identities ---------------------------------------

inline CriterionResult crit10(double* min_slack_out) {
  Timer timer;
  Check ck;

  // (a) APAPC with a == 1 and mu_g = 0 reproduces PAPC
  {
    ProblemInstance P = gen_quadratic_regS(8, 5, 0.0, 10.0, 99);
    const double gamma = 0.8 / P.f.lipschitz_L;
    const double tau = 0.9 / (gamma * P.kb.op_norm_sq);
    SolverState a = SolverState::primal_dual(Vec::Zero(8), Vec::Zero(5));
    SolverState b = a;
    double diff = 0.0;
    for (int t = 0; t < 200; ++t) {
      const SolverState prev = a;
      step_apapc(a, P.f, 0.0, *P.h, *P.K, gamma, tau, 1.0);
      const auto c = check_step_inequality_apapc(prev, a, P.ref, P.f, 0.0,
                                                 *P.h, *P.K, gamma, tau, 1.0);
      *min_slack_out =
          std::min(*min_slack_out, c.slack / certificate_scale(c.lhs, c.rhs));
      step_papc(b, P.f, *P.h, *P.K, gamma, tau);
      diff = std::max(diff, (a.x - b.x).cwiseAbs().maxCoeff());
      diff = std::max(diff, (a.v - b.u).cwiseAbs().maxCoeff());
    }
    ck.require(diff <= 1e-12, "APAPC != PAPC, diff " + fmt(diff));
  }

  // (b) APAPC with K = Id, tau = 1/gamma, mu_g = 0 reproduces APGD with h
  //     in the g slot
  {
    Rng rng(1234);
    Mat A = pdopt::detail::random_psd(8, 1.0, 0.05, rng);
    Vec bq = rng.normal_vec(8);
    SmoothTerm f = make_quadratic(A, bq);
    ProxTerm h = make_huber(0.5);
    CompositeG g{0.0, &h};
    LinearMap K = LinearMap::identity(8);
    const double gamma = 1.0 / f.lipschitz_L;
    MomentumSchedule sched(Regime::apgd_sublinear, {});
    sched.next();  // a_0
    SolverState a = SolverState::primal_dual(Vec::Zero(8), Vec::Zero(8));
    SolverState b = SolverState::primal(Vec::Zero(8));
    double diff = 0.0;
    for (int t = 0; t < 200; ++t) {
      const double an = sched.next();
      step_apapc(a, f, 0.0, h, K, gamma, 1.0 / gamma, an);
      step_apgd(b, f, g, gamma, an);
      diff = std::max(diff, (a.x - b.x).cwiseAbs().maxCoeff());
    }
    ck.require(diff <= 1e-10, "APAPC(K=I) != APGD, diff " + fmt(diff));
  }

  // (c) APGD with a == 1 reproduces PGD
  {
    ProblemInstance P = gen_lasso_like(10, 12, 0.0, 5);
    const double gamma = 1.0 / P.f.lipschitz_L;
    const CompositeG g = P.g_slot();
    SolverState a = SolverState::primal(Vec::Zero(10));
    SolverState b = a;
    double diff = 0.0;
    for (int t = 0; t < 200; ++t) {
      step_apgd(a, P.f, g, gamma, 1.0);
      step_pgd(b, P.f, g, gamma);
      diff = std::max(diff, (a.x - b.x).cwiseAbs().maxCoeff());
    }
    ck.require(diff <= 1e-12, "APGD(a=1) != PGD, diff " + fmt(diff));
  }

  // (d) FISTA == APGD when g = 0
  {
    ProblemInstance P = gen_quadratic_primal(10, 50.0, 66);
    SmoothTerm f = P.f;
    CompositeG g;  // zero
    const double gamma = 1.0 / f.lipschitz_L;
    MomentumSchedule s1(Regime::apgd_sublinear, {});
    s1.next();
    SolverState a = SolverState::primal(Vec::Zero(10));
    SolverState b = a;
    double diff = 0.0;
    double a_prev = 0.0;
    for (int t = 0; t < 200; ++t) {
      const double an = s1.next();
      step_apgd(a, f, g, gamma, an);
      step_fista(b, f, g, gamma, a_prev, an);
      a_prev = an;
      diff = std::max(diff, (a.x - b.x).cwiseAbs().maxCoeff());
    }
    ck.require(diff <= 1e-12, "FISTA != APGD with g=0, diff " + fmt(diff));
  }

  ck.require(timer.seconds() < 5.0, "runtime over 5 s");
  return {10, "reduction-identities", ck.pass,
          ck.msg.empty() ? "all four identities hold" : ck.msg,
          timer.seconds()};
}

// --- criterion 11 point convergence (full level) -----------------------------

inline ProblemInstance make_flat_least_squares(std::uint64_t seed) {
  Rng rng(seed);
  const Index n = 6, rank = 3;
  Eigen::HouseholderQR<Mat> qr(rng.normal_mat(n, n));
  Mat Q = qr.householderQ();
  Vec s(rank);
  s << 1.0, 0.8, 0.5;
  Mat D = s.cwiseSqrt().asDiagonal() * Q.topRows(rank);
  Vec xt = rng.normal_vec(n);
  Vec r = D * xt;
  ProblemInstance P;
  P.seed = seed;
  P.tag = RegimeTag::primal_only;
  P.f = make_least_squares(D, r);
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(P.f.A);
  P.ref.x_star = cod.solve(P.f.b);  // min-norm solution
  P.ref.grad_f_star = P.f.grad(P.ref.x_star);
  P.ref.psi_star = P.psi(P.ref.x_star);
  P.solution_set = std::make_shared<AffineSet>(P.f.A, P.f.b);
  validate_reference(P);
  return P;
}

inline CriterionResult crit11(double* min_slack_out) {
  Timer timer;
  Check ck;
  std::string detail;

  // APGD on a rank-deficient least-squares problem
  {
    ProblemInstance P = make_flat_least_squares(88);
    Json cfg = {{"algorithm", "apgd"},
                {"stepsize", {{"gamma", 1.0 / P.f.lipschitz_L}}},
                {"schedule", {{"regime", "apgd_sublinear"}}},
                {"max_iters", 100000},
                {"check_level", "off"}};
    const ResolvedParams r = resolve_params(Algorithm::apgd, P, cfg);
    const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apgd, P, r);
    RunResult R = run(Algorithm::apgd, P, sc);
    const double dist = P.solution_set->distance(R.final_state.x);
    ck.require(dist <= 1e-5, "APGD distance " + fmt(dist) + " > 1e-5");
    ck.require(R.yx_bound_late <= 10.0 * (R.yx_bound_early + 1e-12),
               "APGD momentum-gap unbounded");
    detail += "apgd dist " + fmt(dist) + "  ";
  }

  // Regime-C APAPC with a flat direction inside ker(K)
  {
    ProblemInstance P = gen_linconstrained(8, 3, 0.0, 777, /*flat=*/true);
    Json cfg = {{"algorithm", "apapc"},
                {"stepsize", {{"rule", "corollary_C"}}},
                {"max_iters", 100000},
                {"check_level", "full_inequality"}};
    const ResolvedParams r = resolve_params(Algorithm::apapc, P, cfg);
    const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apapc, P, r);
    RunResult R = run(Algorithm::apapc, P, sc);
    *min_slack_out = std::min(*min_slack_out, R.min_slack_rel);
    ck.require(R.certificates_ok, "APAPC certificate violated");
    const double dist = P.solution_set->distance(R.final_state.x);
    ck.require(dist <= 1e-5, "APAPC distance " + fmt(dist) + " > 1e-5");
    ck.require(R.yx_bound_late <= 10.0 * (R.yx_bound_early + 1e-12),
               "APAPC momentum-gap unbounded");
    detail += "apapc dist " + fmt(dist);
  }

  ck.require(timer.seconds() < 120.0, "runtime over 120 s");
  return {11, "point-convergence", ck.pass,
          detail + (ck.msg.empty() ? "" : " | " + ck.msg), timer.seconds()};
}

// --- criterion 12 complexity orderings via the bench machinery ---------------

inline CriterionResult crit12() {
  Timer timer;
  Check ck;

  // APGD vs PGD on strongly convex quadratics
  Json suite_a;
  suite_a["rows"] = Json::array();
  for (std::uint64_t seed = 301; seed <= 305; ++seed) {
    Json prob = {{"generator", "quadratic_primal"}, {"n", 20},
                 {"cond", 100.0}, {"seed", seed}};
    suite_a["rows"].push_back({{"name", "apgd-" + std::to_string(seed)},
                               {"problem", prob},
                               {"algorithm", "apgd"},
                               {"max_iters", 100000},
                               {"eps", 1e-9},
                               {"check_level", "off"}});
    suite_a["rows"].push_back({{"name", "pgd-" + std::to_string(seed)},
                               {"problem", prob},
                               {"algorithm", "pgd"},
                               {"max_iters", 100000},
                               {"eps", 1e-9},
                               {"check_level", "off"}});
  }
  const auto rows_a = run_bench_suite(suite_a);
  for (size_t i = 0; i + 1 < rows_a.size(); i += 2) {
    ck.require(rows_a[i].ok && rows_a[i + 1].ok, "bench row failed");
    if (!rows_a[i].ok || !rows_a[i + 1].ok) continue;
    const long ia = rows_a[i].result.value("iters_to_eps", -1L);
    const long ip = rows_a[i + 1].result.value("iters_to_eps", -1L);
    ck.require(ia > 0 && ip > 0 && ia < ip,
               rows_a[i].name + ": apgd " + std::to_string(ia) +
                   " !< pgd " + std::to_string(ip));
  }

  // APAPC vs PAPC on regime-S instances with L_f/mu_g = 100
  Json suite_b;
  suite_b["rows"] = Json::array();
  for (std::uint64_t seed = 401; seed <= 405; ++seed) {
    Json prob = {{"generator", "quadratic_regS"}, {"n", 20}, {"m", 15},
                 {"mu_g", 0.01}, {"cond_f", 1e4}, {"seed", seed}};
    suite_b["rows"].push_back({{"name", "apapc-" + std::to_string(seed)},
                               {"problem", prob},
                               {"algorithm", "apapc"},
                               {"stepsize", {{"rule", "corollary_S"}}},
                               {"max_iters", 50000},
                               {"eps", 1e-8},
                               {"check_level", "off"}});
    suite_b["rows"].push_back({{"name", "papc-" + std::to_string(seed)},
                               {"problem", prob},
                               {"algorithm", "papc"},
                               {"stepsize", {{"rule", "papc_default"}}},
                               {"max_iters", 50000},
                               {"eps", 1e-8},
                               {"check_level", "off"}});
  }
  const auto rows_b = run_bench_suite(suite_b);
  std::string detail;
  for (size_t i = 0; i + 1 < rows_b.size(); i += 2) {
    ck.require(rows_b[i].ok && rows_b[i + 1].ok, "bench row failed");
    if (!rows_b[i].ok || !rows_b[i + 1].ok) continue;
    const long ia = rows_b[i].result.value("iters_to_eps", -1L);
    const long ip = rows_b[i + 1].result.value("iters_to_eps", -1L);
    ck.require(ia > 0 && ip > 0 && ia < ip,
               rows_b[i].name + ": apapc " + std::to_string(ia) +
                   " !< papc " + std::to_string(ip));
    if (i == 0)
      detail = "sample counts: apapc " + std::to_string(ia) + " vs papc " +
               std::to_string(ip);
  }
  return {12, "complexity-orderings", ck.pass,
          detail + (ck.msg.empty() ? "" : " | " + ck.msg), timer.seconds()};
}

}  // namespace detail

inline std::vector<CriterionResult> run_all(Level level) {
  using namespace detail;
  std::vector<CriterionResult> out;
  double min_slack_t1 = kInf;   // APGD certificate slack (criteria 1-2)
  double min_slack_t2 = kInf;   // APAPC certificate slack (all APAPC runs)

  out.push_back(crit1(&min_slack_t1));
  out.push_back(crit2(&min_slack_t1));
  // criterion 3: APGD per-step certificate across the runs of criteria 1-2
  out.push_back({3, "apgd-step-certificate", min_slack_t1 >= -1e-8,
                 "min relative slack " + fmt(min_slack_t1), 0.0});
  CriterionResult c5 = crit5(&min_slack_t2);
  CriterionResult c6 = crit6(&min_slack_t2);
  CriterionResult c7 = crit7(&min_slack_t2);
  CriterionResult c8 = crit8(&min_slack_t2);
  CriterionResult c9 = crit9(&min_slack_t2);
  CriterionResult c10 = crit10(&min_slack_t2);
  CriterionResult c11{11, "point-convergence", true,
                      "skipped (fast level)", 0.0};
  if (level == Level::full) c11 = crit11(&min_slack_t2);
  // criterion 4: APAPC per-step certificate across every APAPC run above
  out.push_back({4, "apapc-step-certificate", min_slack_t2 >= -1e-7,
                 "min relative slack " + fmt(min_slack_t2), 0.0});
  out.push_back(std::move(c5));
  out.push_back(std::move(c6));
  out.push_back(std::move(c7));
  out.push_back(std::move(c8));
  out.push_back(std::move(c9));
  out.push_back(std::move(c10));
  out.push_back(std::move(c11));
  out.push_back(crit12());
  return out;
}

inline bool print_report(const std::vector<CriterionResult>& results,
                         std::ostream& os) {
  bool all = true;
  for (const auto& r : results) {
    os << (r.pass ? "PASS" : "FAIL") << " [" << std::setw(2) << r.id << "] "
       << r.name << " - " << r.detail;
    if (r.seconds > 0) os << " [" << detail::fmt(r.seconds) << "s]";
    os << "\n";
    all = all && r.pass;
  }
  os << (all ? "acceptance: all criteria passed"
             : "acceptance: FAILURES present")
     << "\n";
  return all;
}

}  // namespace pdopt::acceptance
