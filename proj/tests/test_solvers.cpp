#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "pdopt/harness.hpp"

using namespace pdopt;

namespace {

Mat mat1(double v) {
  Mat m(1, 1);
  m << v;
  return m;
}

Vec vec1(double v) {
  Vec x(1);
  x << v;
  return x;
}

}  // namespace

TEST_CASE("pgd one-dimensional steps") {
  // f = x^2/2, g = 0, gamma = 1: one exact step to the minimizer
  SmoothTerm f = make_quadratic(mat1(1.0), vec1(0.0));
  CompositeG g;
  SolverState s = SolverState::primal(vec1(1.0));
  step_pgd(s, f, g, 1.0);
  CHECK(s.x[0] == 0.0);

  // projection keeps the boundary: f = (x + 2)^2/2, g = indicator of [0, inf)
  SmoothTerm f2 = make_quadratic(mat1(1.0), vec1(-2.0));
  ProxTerm box = make_box_indicator(vec1(0.0), vec1(kInf));
  CompositeG g2{0.0, &box};
  SolverState s2 = SolverState::primal(vec1(0.0));
  step_pgd(s2, f2, g2, 1.0);
  CHECK(s2.x[0] == 0.0);

  // gamma = 1/L on f = 4 x^2 / 2
  SmoothTerm f3 = make_quadratic(mat1(4.0), vec1(0.0));
  SolverState s3 = SolverState::primal(vec1(1.0));
  step_pgd(s3, f3, g, 0.25);
  CHECK(s3.x[0] == 0.0);
}

TEST_CASE("apgd weighted-average identity for a_t = (t+1)/2") {
  Rng rng(3);
  Mat A = rng.normal_mat(4, 4);
  A = (A * A.transpose()).eval();
  SmoothTerm f = make_quadratic(A, rng.normal_vec(4));
  CompositeG g;
  SolverState s = SolverState::primal(rng.normal_vec(4));
  std::vector<Vec> zs;  // z^1 ... z^t
  const int T = 5;
  for (int t = 0; t < T; ++t) {
    step_apgd(s, f, g, 0.5 / f.lipschitz_L, 0.5 * (t + 2));
    zs.push_back(s.z);
  }
  Vec avg = Vec::Zero(4);
  for (int k = 1; k <= T; ++k)
    avg += (2.0 * k / (T * (T + 1.0))) * zs[static_cast<size_t>(k - 1)];
  CHECK((s.x - avg).norm() <= 1e-12 * (1.0 + avg.norm()));
}

TEST_CASE("apgd first step lands on z when a_1 = 1") {
  SmoothTerm f = make_quadratic(mat1(2.0), vec1(0.0));
  CompositeG g;
  SolverState s = SolverState::primal(vec1(1.0));
  step_apgd(s, f, g, 0.5, 1.0);
  CHECK(s.z[0] == 0.0);  // z^1 = z^0 - gamma grad f(x^0) = 1 - 0.5*2
  CHECK(s.x[0] == s.z[0]);
}

TEST_CASE("apgd averaging identity along a run") {
  ProblemInstance P = gen_lasso_like(8, 10, 0.0, 21);
  const CompositeG g = P.g_slot();
  MomentumSchedule sched(Regime::apgd_sublinear, {});
  sched.next();
  SolverState s = SolverState::primal(Vec::Zero(8));
  for (int t = 0; t < 50; ++t) {
    const Vec x_old = s.x;
    const double an = sched.next();
    step_apgd(s, P.f, g, 1.0 / P.f.lipschitz_L, an);
    const Vec rhs = s.x + (an - 1.0) * (s.x - x_old);
    CHECK((s.z - rhs).norm() <= 1e-9 * (1.0 + s.z.norm()));
  }
}

TEST_CASE("fista soft-threshold step and box feasibility") {
  // f = (x - 3)^2 / 2, g = |x|, gamma = 1, from 0: x^1 = soft(3, 1) = 2
  SmoothTerm f = make_quadratic(mat1(1.0), vec1(3.0));
  ProxTerm l1 = make_l1(1.0);
  CompositeG g{0.0, &l1};
  SolverState s = SolverState::primal(vec1(0.0));
  step_fista(s, f, g, 1.0, 0.0, 1.0);
  CHECK(s.x[0] == 2.0);

  // prox output stays feasible for an indicator g
  Rng rng(5);
  Mat A = rng.normal_mat(3, 3);
  A = (A * A.transpose()).eval();
  SmoothTerm f2 = make_quadratic(A, rng.normal_vec(3));
  ProxTerm box = make_box_indicator(-Vec::Ones(3), Vec::Ones(3));
  CompositeG g2{0.0, &box};
  MomentumSchedule sched(Regime::apgd_sublinear, {});
  sched.next();
  SolverState s2 = SolverState::primal(Vec::Zero(3));
  for (int t = 0; t < 30; ++t) {
    step_fista(s2, f2, g2, 1.0 / f2.lipschitz_L, 0.0, sched.next());
    CHECK(box.eval(s2.x).is_finite());
  }
}

TEST_CASE("papc with h = 0 reduces to gradient descent") {
  Rng rng(9);
  Mat A = rng.normal_mat(3, 3);
  A = (A * A.transpose()).eval();
  SmoothTerm f = make_quadratic(A, rng.normal_vec(3));
  ProxTerm h = make_zero();
  LinearMap K = LinearMap::identity(3);
  const double gamma = 0.9 / f.lipschitz_L;
  SolverState s = SolverState::primal_dual(rng.normal_vec(3), Vec::Zero(3));
  Vec xr = s.x;
  for (int t = 0; t < 25; ++t) {
    step_papc(s, f, h, K, gamma, 0.5 / gamma);
    xr = xr - gamma * f.grad(xr);
    CHECK(s.u.norm() == 0.0);
    CHECK((s.x - xr).norm() <= 1e-13 * (1.0 + xr.norm()));
  }
}

TEST_CASE("cv reduces to pdhg when f = 0 and to pgd when h = 0") {
  Rng rng(31);
  ProblemInstance P = gen_quadratic_regS(4, 3, 0.0, 10.0, 44);
  const LinearMap& K = *P.K;
  const ProxTerm& h = *P.h;
  const double gamma = 0.4;
  const double tau = 0.3 / P.kb.op_norm_sq;

  // f = 0: compare against a hand-rolled PDHG iteration
  SmoothTerm f0 = make_quadratic(Mat::Zero(4, 4), Vec::Zero(4));
  ProxTerm l1 = make_l1(0.6);
  CompositeG g{0.0, &l1};
  SolverState s = SolverState::primal_dual(rng.normal_vec(4), Vec::Zero(3));
  Vec x = s.x, u = s.u;
  for (int t = 0; t < 40; ++t) {
    step_cv(s, f0, g, h, K, gamma, tau);
    const Vec xn = l1.prox(gamma, x - gamma * K.adjoint_apply(u));
    u = conj_prox(h, tau, u + tau * K.apply(2.0 * xn - x));
    x = xn;
    CHECK((s.x - x).norm() <= 1e-14);
    CHECK((s.u - u).norm() <= 1e-14);
  }

  // h = 0: dual stays at the origin and the primal step is PGD on f + g
  ProblemInstance Q = gen_lasso_like(4, 6, 0.0, 12);
  ProxTerm hz = make_zero();
  const CompositeG gq = Q.g_slot();
  SolverState s2 = SolverState::primal_dual(rng.normal_vec(4), Vec::Zero(4));
  SolverState s3 = SolverState::primal(s2.x);
  const double g2 = 0.8 / Q.f.lipschitz_L;
  for (int t = 0; t < 30; ++t) {
    step_cv(s2, Q.f, gq, hz, LinearMap::identity(4), g2, 1.0);
    step_pgd(s3, Q.f, gq, g2);
    CHECK(s2.u.norm() == 0.0);
    CHECK((s2.x - s3.x).norm() <= 1e-14);
  }
}

TEST_CASE("engines hold their fixed points for 100 iterations") {
  ProblemInstance P = gen_quadratic_regS(6, 4, 0.1, 20.0, 77);
  const double gamma = 0.5 / P.f.lipschitz_L;
  const double tau = 0.9 / (gamma * P.kb.op_norm_sq);

  SECTION("papc") {
    // papc solves min f + mu_g/2 |.|^2 + h(Kx) with the quadratic folded in
    SolverState s = SolverState::primal_dual(P.ref.x_star, P.ref.u_star);
    SmoothTerm ff = make_quadratic(
        P.f.A + P.mu_g * Mat::Identity(6, 6), P.f.b);
    for (int t = 0; t < 100; ++t) step_papc(s, ff, *P.h, *P.K, gamma, tau);
    CHECK((s.x - P.ref.x_star).norm() <= 1e-10);
    CHECK((s.u - P.ref.u_star).norm() <= 1e-10);
  }
  SECTION("apapc") {
    SolverState s = SolverState::primal_dual(P.ref.x_star, P.ref.u_star);
    MomentumSchedule sched(Regime::constant_one, {});
    sched.next();
    for (int t = 0; t < 100; ++t)
      step_apapc(s, P.f, P.mu_g, *P.h, *P.K, gamma, tau, sched.next());
    CHECK((s.x - P.ref.x_star).norm() <= 1e-10);
    CHECK((s.v - P.ref.u_star).norm() <= 1e-10);
  }
  SECTION("cv") {
    SolverState s = SolverState::primal_dual(P.ref.x_star, P.ref.u_star);
    CompositeG g{P.mu_g, nullptr};
    const double tcv = (1.0 / gamma - P.f.lipschitz_L / 2.0) / P.kb.op_norm_sq;
    for (int t = 0; t < 100; ++t) step_cv(s, P.f, g, *P.h, *P.K, gamma, tcv);
    CHECK((s.x - P.ref.x_star).norm() <= 1e-10);
    CHECK((s.u - P.ref.u_star).norm() <= 1e-10);
  }
  SECTION("primal engines on a primal instance") {
    ProblemInstance Q = gen_quadratic_primal(6, 50.0, 3);
    const CompositeG g = Q.g_slot();
    const double gq = 1.0 / Q.f.lipschitz_L;
    SolverState a = SolverState::primal(Q.ref.x_star);
    SolverState b = a, c = a;
    MomentumSchedule sched(Regime::apgd_sublinear, {});
    sched.next();
    double a_prev = 0.0;
    for (int t = 0; t < 100; ++t) {
      const double an = sched.next();
      step_pgd(a, Q.f, g, gq);
      step_apgd(b, Q.f, g, gq, an);
      step_fista(c, Q.f, g, gq, a_prev, an);
      a_prev = an;
    }
    CHECK((a.x - Q.ref.x_star).norm() <= 1e-10);
    CHECK((b.x - Q.ref.x_star).norm() <= 1e-10);
    CHECK((c.x - Q.ref.x_star).norm() <= 1e-10);
  }
}

TEST_CASE("apapc affine dual shortcut matches the prox route") {
  ProblemInstance P = gen_linconstrained(8, 4, 0.05, 55);
  const double gamma = 1.0 / (2.0 * P.f.lipschitz_L);
  const double tau = 1.0 / (gamma * P.kb.op_norm_sq);
  SolverState a = SolverState::primal_dual(Vec::Zero(8), Vec::Zero(P.K->rows()));
  SolverState b = a;
  ScheduleParams sp;
  sp.gamma = gamma;
  sp.tau = tau;
  sp.L_f = P.f.lipschitz_L;
  sp.mu_g = P.mu_g;
  sp.lam = P.kb.lam_min_plus;
  sp.K_norm_sq = P.kb.op_norm_sq;
  MomentumSchedule s1(Regime::regC, sp);
  MomentumSchedule s2 = s1;
  s1.next();
  s2.next();
  for (int t = 0; t < 100; ++t) {
    step_apapc(a, P.f, P.mu_g, *P.h, *P.K, gamma, tau, s1.next(), true);
    step_apapc(b, P.f, P.mu_g, *P.h, *P.K, gamma, tau, s2.next(), false);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.v - b.v).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("run: zero iterations yields only the initial record") {
  ProblemInstance P = gen_quadratic_primal(5, 10.0, 8);
  SolveConfig cfg;
  cfg.gamma = 1.0 / P.f.lipschitz_L;
  cfg.schedule = MomentumSchedule(Regime::apgd_sublinear, {});
  cfg.max_iters = 0;
  const RunResult R = run(Algorithm::apgd, P, cfg);
  CHECK(R.records.size() == 1);
  CHECK(R.records[0].t == 0);
  CHECK(R.iters == 0);
}

TEST_CASE("run: bit-identical traces across repeated runs") {
  ProblemInstance P = gen_quadratic_regS(10, 8, 0.0, 30.0, 91);
  Json cfg = {{"algorithm", "apapc"},
              {"stepsize", {{"rule", "corollary_S"}}},
              {"max_iters", 50},
              {"check_level", "full_inequality"},
              {"problem",
               {{"generator", "quadratic_regS"}, {"n", 10}, {"m", 8},
                {"mu_g", 0.0}, {"cond_f", 30.0}, {"seed", 91}}}};
  const SolveOutput a = run_solve_config(cfg);
  const SolveOutput b = run_solve_config(cfg);
  std::ostringstream sa, sb;
  write_trace_csv(a.records, sa);
  write_trace_csv(b.records, sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("run: apgd keeps iterates feasible once x1 is feasible") {
  Rng rng(61);
  Mat A = rng.normal_mat(4, 4);
  A = (A * A.transpose()).eval();
  ProblemInstance P;
  P.f = make_quadratic(A, rng.normal_vec(4));
  P.g = make_box_indicator(-Vec::Ones(4), Vec::Ones(4));
  P.tag = RegimeTag::primal_only;
  // reference by projected gradient (certified fixed point)
  const CompositeG g = P.g_slot();
  Vec x = Vec::Zero(4);
  for (int it = 0; it < 200000; ++it)
    x = g.prox(1.0 / P.f.lipschitz_L, x - (1.0 / P.f.lipschitz_L) * P.f.grad(x));
  P.ref.x_star = x;
  P.ref.grad_f_star = P.f.grad(x);
  P.ref.psi_star = P.psi(x);
  validate_reference(P);

  SolveConfig cfg;
  cfg.gamma = 1.0 / P.f.lipschitz_L;
  cfg.schedule = MomentumSchedule(Regime::apgd_sublinear, {});
  cfg.max_iters = 60;
  cfg.x0 = 5.0 * Vec::Ones(4);  // infeasible start
  const RunResult R = run(Algorithm::apgd, P, cfg);
  // x^1 = z^1 is a prox output, and feasibility then propagates
  CHECK(P.g->eval(R.final_state.x).is_finite());
  CHECK(std::isnan(R.records[0].lag_gap));  // infinite initial gap -> nan
}

TEST_CASE("run: averaging weights reproduce x^t and u^t at t = 6") {
  ProblemInstance P = gen_quadratic_regS(6, 5, 0.0, 15.0, 17);
  Json cfg = {{"algorithm", "apapc"},
              {"stepsize", {{"rule", "corollary_S"}}},
              {"max_iters", 6},
              {"check_level", "off"},
              {"problem",
               {{"generator", "quadratic_regS"}, {"n", 6}, {"m", 5},
                {"mu_g", 0.0}, {"cond_f", 15.0}, {"seed", 17}}}};
  const ResolvedParams r = resolve_params(Algorithm::apapc, P, cfg);
  const SolveConfig sc = solve_config_from_json(cfg, Algorithm::apapc, P, r);
  // rerun manually, keeping all z^k, v^k and the schedule values
  MomentumSchedule sched = *sc.schedule;
  sched.next();
  SolverState s = SolverState::primal_dual(Vec::Zero(6), Vec::Zero(5));
  std::vector<Vec> zs, vs;
  std::vector<double> as;
  for (int t = 0; t < 6; ++t) {
    const double an = sched.next();
    step_apapc(s, P.f, P.mu_g, *P.h, *P.K, sc.gamma, sc.tau, an);
    zs.push_back(s.z);
    vs.push_back(s.v);
    as.push_back(an);
  }
  Vec xw = Vec::Zero(6), uw = Vec::Zero(5);
  for (size_t k = 0; k < 6; ++k) {
    double w = 1.0 / as[k];
    for (size_t j = k + 1; j < 6; ++j) w *= 1.0 - 1.0 / as[j];
    xw += w * zs[k];
    uw += w * vs[k];
  }
  CHECK((s.x - xw).norm() <= 1e-12 * (1.0 + xw.norm()));
  CHECK((s.u - uw).norm() <= 1e-12 * (1.0 + uw.norm()));
}

TEST_CASE("run: gap_below stops early on a strongly convex instance") {
  ProblemInstance P = gen_quadratic_regS(8, 6, 0.05, 10.0, 29);
  Json cfg = {{"algorithm", "apapc"},
              {"stepsize", {{"rule", "corollary_S"}}},
              {"max_iters", 100000},
              {"stop", {{"rule", "gap_below"}, {"eps", 1e-9}}},
              {"check_level", "lyapunov"},
              {"problem",
               {{"generator", "quadratic_regS"}, {"n", 8}, {"m", 6},
                {"mu_g", 0.05}, {"cond_f", 10.0}, {"seed", 29}}}};
  const SolveOutput out = run_solve_config(cfg);
  CHECK(out.summary["gap_hit_iter"].get<long>() > 0);
  CHECK(out.summary["iterations"].get<long>() < 100000);
}

TEST_CASE("run: strict mode aborts when the smoothness constant is a lie") {
  ProblemInstance P = gen_quadratic_primal(10, 100.0, 19);
  P.f.lipschitz_L /= 8.0;  // understated L admits a divergent stepsize
  SolveConfig cfg;
  cfg.gamma = 1.0 / P.f.lipschitz_L;
  cfg.schedule = MomentumSchedule(Regime::apgd_sublinear, {});
  cfg.max_iters = 2000;
  cfg.check_level = CheckLevel::full_inequality;
  cfg.strict = true;
  try {
    run(Algorithm::apgd, P, cfg);
    FAIL("expected VerificationError");
  } catch (const VerificationError& e) {
    // the abort names the offending iteration
    CHECK(std::string(e.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("run: configuration validation") {
  ProblemInstance P = gen_quadratic_primal(5, 10.0, 4);
  SolveConfig cfg;
  cfg.gamma = 3.0 / P.f.lipschitz_L;
  cfg.schedule = MomentumSchedule(Regime::apgd_sublinear, {});
  CHECK_THROWS_AS(run(Algorithm::apgd, P, cfg), ConfigError);

  SolveConfig c2;
  c2.gamma = 1.0;
  CHECK_THROWS_AS(run(Algorithm::apgd, P, c2), ConfigError);  // no schedule

  ProblemInstance PD = gen_quadratic_regS(5, 4, 0.0, 10.0, 6);
  SolveConfig c3;
  c3.gamma = 0.5;
  CHECK_THROWS_AS(run(Algorithm::pgd, PD, c3), ConfigError);  // composite

  SolveConfig c4;
  c4.gamma = 1.0 / P.f.lipschitz_L;
  c4.schedule = MomentumSchedule(Regime::apgd_sublinear, {});
  c4.x0 = Vec::Zero(3);
  CHECK_THROWS_AS(run(Algorithm::apgd, P, c4), ConfigError);  // x0 size

  // papc stepsize product over the limit
  SolveConfig c5;
  c5.gamma = 1.0 / PD.f.lipschitz_L;
  c5.tau = 1.5 / (c5.gamma * PD.kb.op_norm_sq);
  CHECK_THROWS_AS(run(Algorithm::papc, PD, c5), ConfigError);
}

TEST_CASE("run: optional trailing pgd polish restores prox structure") {
  ProblemInstance P = gen_lasso_like(12, 16, 0.0, 33);
  Json base = {{"algorithm", "apgd"},
               {"max_iters", 300},
               {"check_level", "off"},
               {"problem",
                {{"generator", "lasso_like"}, {"n", 12}, {"m", 16},
                 {"lam_l1", 0.0}, {"seed", 33}}}};
  const ResolvedParams r = resolve_params(Algorithm::apgd, P, base);
  SolveConfig sc = solve_config_from_json(base, Algorithm::apgd, P, r);
  sc.final_pgd_polish = true;
  const RunResult R = run(Algorithm::apgd, P, sc);
  CHECK(R.records.size() == 302u);  // one extra polished record
  // the polished point is a prox output: exact zeros where x* is zero
  int exact_zeros = 0;
  for (Index i = 0; i < 12; ++i)
    if (R.final_state.x[i] == 0.0) ++exact_zeros;
  CHECK(exact_zeros > 0);
}

TEST_CASE("run: stored states keep the history fields per check level") {
  ProblemInstance P = gen_quadratic_regS(6, 4, 0.0, 10.0, 47);
  Json base = {{"algorithm", "apapc"},
               {"stepsize", {{"rule", "corollary_S"}}},
               {"max_iters", 20},
               {"problem",
                {{"generator", "quadratic_regS"}, {"n", 6}, {"m", 4},
                 {"mu_g", 0.0}, {"cond_f", 10.0}, {"seed", 47}}}};
  const ResolvedParams r = resolve_params(Algorithm::apapc, P, base);
  SolveConfig sc = solve_config_from_json(base, Algorithm::apapc, P, r);
  sc.store_states = true;
  sc.check_level = CheckLevel::full_inequality;
  const RunResult R = run(Algorithm::apapc, P, sc);
  REQUIRE(R.states.size() == 21u);
  CHECK(R.states[5].x.size() == 6);
  CHECK(R.states[5].z.size() == 6);
  CHECK(R.states[5].v.size() == 4);
  CHECK(R.states[5].has_aux);  // y, zhat, u retained under checking
  CHECK(R.states[5].z_hat.size() == 6);

  sc.check_level = CheckLevel::off;
  const RunResult R2 = run(Algorithm::apapc, P, sc);
  CHECK(R2.states[5].x.size() == 6);
  CHECK_FALSE(R2.states[5].has_aux);  // auxiliary history dropped
}

TEST_CASE("apgd iterates satisfy a dyadic Cauchy criterion") {
  // nonunique minimizers with a badly conditioned row space, so the
  // trajectory is still moving over the whole dyadic ladder; distances
  // ||x^{2t} - x^t|| must shrink once the momentum phase settles
  Rng rng(88);
  Eigen::HouseholderQR<Mat> qr(rng.normal_mat(6, 6));
  Mat Q = qr.householderQ();
  Vec sv(3);
  sv << 1.0, 0.03, 0.02;
  Mat D = sv.asDiagonal() * Q.topRows(3);
  SmoothTerm f = make_least_squares(D, D * rng.normal_vec(6));
  CompositeG g;
  MomentumSchedule sched(Regime::apgd_sublinear, {});
  sched.next();
  SolverState s = SolverState::primal(Vec::Zero(6));
  std::vector<Vec> snaps;  // x at t = 64, 128, ..., 8192
  for (long t = 1; t <= 8192; ++t) {
    step_apgd(s, f, g, 1.0 / f.lipschitz_L, sched.next());
    if (t >= 64 && (t & (t - 1)) == 0) snaps.push_back(s.x);
  }
  for (size_t i = 0; i + 2 < snaps.size(); ++i) {
    const double d1 = (snaps[i + 1] - snaps[i]).norm();
    const double d2 = (snaps[i + 2] - snaps[i + 1]).norm();
    CHECK(d2 <= d1 * (1.0 + 1e-9) + 1e-14);
  }
}
