#pragma once

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "pdopt/json_io.hpp"
#include "pdopt/runner.hpp"

namespace pdopt {

// ---------------------------------------------------------------------------
// Trace CSV (schema fixed)
// ---------------------------------------------------------------------------

inline constexpr const char* kTraceHeader =
    "t,a_t,lyap,lag_gap,primal_gap,dist_z_sq,dist_v_sq,feas_sq,ineq_slack";

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_trace_csv(const std::vector<TraceRecord>& recs,
                            std::ostream& out) {
  out << kTraceHeader << "\n";
  for (const auto& r : recs) {
    out << r.t << ',' << format_double(r.a_t) << ',' << format_double(r.lyap)
        << ',' << format_double(r.lag_gap) << ','
        << format_double(r.primal_gap) << ',' << format_double(r.dist_z_sq)
        << ',' << format_double(r.dist_v_sq) << ','
        << format_double(r.feas_sq) << ',' << format_double(r.ineq_slack)
        << "\n";
  }
}

inline void write_trace_csv(const std::vector<TraceRecord>& recs,
                            const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  write_trace_csv(recs, f);
}

inline std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("empty trace: " + path);
  if (line != kTraceHeader)
    throw IoError("unexpected trace header in " + path);
  std::vector<TraceRecord> recs;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::vector<std::string> toks;
    while (std::getline(ls, tok, ',')) toks.push_back(tok);
    if (toks.size() != 9) throw IoError("bad trace row: " + line);
    auto num = [](const std::string& s) {
      if (s == "nan") return kNaN;
      if (s == "inf") return kInf;
      if (s == "-inf") return -kInf;
      return std::stod(s);
    };
    TraceRecord r;
    r.t = std::stol(toks[0]);
    r.a_t = num(toks[1]);
    r.lyap = num(toks[2]);
    r.lag_gap = num(toks[3]);
    r.primal_gap = num(toks[4]);
    r.dist_z_sq = num(toks[5]);
    r.dist_v_sq = num(toks[6]);
    r.feas_sq = num(toks[7]);
    r.ineq_slack = num(toks[8]);
    recs.push_back(r);
  }
  return recs;
}

// ---------------------------------------------------------------------------
// Config resolution
// ---------------------------------------------------------------------------

struct ResolvedParams {
  double gamma = 0.0, tau = 0.0, nu = 0.0;
  double a_sharp = kInf;
  double lam = 0.0, K_norm_sq = 0.0;
  double L_f = 0.0, mu_g = 0.0, mu_hconj = 0.0;
  std::string rule = "explicit";
  Regime regime = Regime::constant_one;
  bool linear_form = false;
};

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "pgd") return Algorithm::pgd;
  if (s == "apgd") return Algorithm::apgd;
  if (s == "fista") return Algorithm::fista;
  if (s == "papc") return Algorithm::papc;
  if (s == "cv") return Algorithm::cv;
  if (s == "apapc") return Algorithm::apapc;
  throw ConfigError("algorithm: unknown value '" + s + "'");
}

inline ProblemInstance instance_from_config(const Json& cfg) {
  if (!cfg.contains("problem")) throw ConfigError("problem: missing");
  const Json& p = cfg.at("problem");
  if (p.is_string()) return load_instance(p.get<std::string>());
  if (!p.is_object() || !p.contains("generator"))
    throw ConfigError("problem: expected a path or a generator object");
  const std::string gen = p.at("generator").get<std::string>();
  const std::uint64_t seed = p.value("seed", std::uint64_t{1});
  if (gen == "quadratic_regS")
    return gen_quadratic_regS(p.value("n", Index{30}), p.value("m", Index{20}),
                              p.value("mu_g", 0.0), p.value("cond_f", 100.0),
                              seed);
  if (gen == "quadratic_regB")
    return gen_quadratic_regB(p.value("n", Index{20}), p.value("mu_g", 0.0),
                              p.value("cond_f", 1e4),
                              p.value("h_weight", 50.0),
                              p.value("sigma_lo", 0.25), seed);
  if (gen == "quadratic_primal")
    return gen_quadratic_primal(p.value("n", Index{40}),
                                p.value("cond", 1e4), seed);
  if (gen == "lasso_like")
    return gen_lasso_like(p.value("n", Index{50}), p.value("m", Index{60}),
                          p.value("lam_l1", 0.0), seed);
  if (gen == "linconstrained")
    return gen_linconstrained(p.value("n", Index{15}),
                              p.value("m_rank", Index{8}),
                              p.value("mu_g", 0.0), seed,
                              p.value("flat", false));
  if (gen == "consensus")
    return gen_consensus(p.value("n_agents", Index{8}),
                         p.value("dim", Index{2}), p.value("mu_g", 0.0), seed);
  throw ConfigError("problem.generator: unknown generator '" + gen + "'");
}

// Pure function: (algorithm, instance, config) -> stepsizes + schedule
// parameters, resolved against the instance's stored exact constants.
inline ResolvedParams resolve_params(Algorithm alg, const ProblemInstance& P,
                                     const Json& cfg) {
  ResolvedParams r;
  r.L_f = P.f.lipschitz_L;
  r.mu_g = P.mu_g;
  r.mu_hconj = P.h ? P.h->strong_mu_conj : 0.0;
  r.K_norm_sq = P.K ? P.kb.op_norm_sq : 0.0;
  const double knorm = std::sqrt(r.K_norm_sq);

  const Json ss = cfg.value("stepsize", Json::object());
  const std::string rule = ss.value("rule", ss.contains("gamma") ? "explicit"
                                                                 : "default");
  r.rule = rule;
  if (rule == "explicit") {
    if (!ss.contains("gamma")) throw ConfigError("stepsize.gamma: missing");
    r.gamma = ss.at("gamma").get<double>();
    r.tau = ss.value("tau", 0.0);
  } else if (rule == "default") {
    switch (alg) {
      case Algorithm::pgd:
      case Algorithm::apgd:
      case Algorithm::fista:
        r.gamma = 1.0 / r.L_f;
        break;
      case Algorithm::papc:
        r.gamma = 1.0 / (r.L_f + r.mu_g);
        r.tau = 1.0 / (r.gamma * r.K_norm_sq);
        break;
      case Algorithm::cv:
        r.gamma = 1.0 / r.L_f;
        r.tau = (1.0 / r.gamma - r.L_f / 2.0) / r.K_norm_sq;
        break;
      case Algorithm::apapc:
        throw ConfigError(
            "stepsize: apapc needs an explicit pair or a corollary rule");
    }
  } else if (rule == "corollary_S") {
    if (!P.h || !P.K || r.mu_hconj <= 0.0)
      throw ConfigError("stepsize.rule corollary_S: needs smooth h and K");
    r.gamma = std::min(1.0 / r.L_f, std::sqrt(r.mu_hconj / r.L_f) / knorm);
    r.tau = 1.0 / (r.gamma * r.K_norm_sq);
  } else if (rule == "corollary_B" || rule == "corollary_C") {
    if (!P.K) throw ConfigError("stepsize.rule: needs K");
    r.lam = rule == "corollary_B" ? P.kb.lam_min : P.kb.lam_min_plus;
    if (r.lam <= 0.0)
      throw ConfigError("stepsize.rule " + rule + ": lambda is zero");
    const double hi = 1.0 / (2.0 * r.L_f);
    const double lo = hi * std::sqrt(r.lam / r.K_norm_sq);
    const double frac = ss.value("gamma_frac", 1.0);
    if (frac < 0.0 || frac > 1.0)
      throw ConfigError("stepsize.gamma_frac: must lie in [0, 1]");
    r.gamma = lo + frac * (hi - lo);
    const double nu = ss.value("nu", 1.0);
    if (nu <= 0.0 || nu > 1.0)
      throw ConfigError("stepsize.nu: must lie in (0, 1]");
    r.tau = nu / (r.gamma * r.K_norm_sq);
  } else if (rule == "papc_default") {
    const double L = r.L_f + r.mu_g;
    r.gamma = (r.mu_g > 0.0 && r.mu_hconj > 0.0)
                  ? std::min(1.0 / L, std::sqrt(r.mu_hconj / r.mu_g) / knorm)
                  : 1.0 / L;
    r.tau = 1.0 / (r.gamma * r.K_norm_sq);
  } else {
    throw ConfigError("stepsize.rule: unknown rule '" + rule + "'");
  }
  if (P.K && r.tau == 0.0 && alg != Algorithm::pgd &&
      alg != Algorithm::apgd && alg != Algorithm::fista)
    throw ConfigError("stepsize.tau: missing for a primal-dual algorithm");
  r.nu = P.K ? r.gamma * r.tau * r.K_norm_sq : 0.0;

  // schedule regime
  const Json sj = cfg.value("schedule", Json::object());
  std::string reg = sj.value("regime", "auto");
  r.linear_form = sj.value("linear_form", false);
  if (reg == "auto") {
    switch (alg) {
      case Algorithm::pgd:
      case Algorithm::papc:
      case Algorithm::cv:
        reg = "constant_one";
        break;
      case Algorithm::apgd:
      case Algorithm::fista:
        reg = P.mu_g > 0.0 ? "apgd_capped" : "apgd_sublinear";
        break;
      case Algorithm::apapc:
        switch (P.tag) {
          case RegimeTag::regS:
            reg = P.mu_g > 0.0 ? "regS_capped" : "regS";
            break;
          case RegimeTag::regB:
            reg = P.mu_g > 0.0 ? "regB_capped" : "regB";
            break;
          case RegimeTag::regC:
            reg = P.mu_g > 0.0 ? "regC_capped" : "regC";
            break;
          default:
            throw ConfigError("schedule: apapc requires a composite instance");
        }
        break;
    }
  }
  if (reg == "constant_one") r.regime = Regime::constant_one;
  else if (reg == "apgd_sublinear") r.regime = Regime::apgd_sublinear;
  else if (reg == "apgd_capped") r.regime = Regime::apgd_capped;
  else if (reg == "regS") r.regime = Regime::regS;
  else if (reg == "regS_capped") r.regime = Regime::regS_capped;
  else if (reg == "regB") r.regime = Regime::regB;
  else if (reg == "regB_capped") r.regime = Regime::regB_capped;
  else if (reg == "regC") r.regime = Regime::regC;
  else if (reg == "regC_capped") r.regime = Regime::regC_capped;
  else throw ConfigError("schedule.regime: unknown value '" + reg + "'");

  if (r.regime == Regime::regB || r.regime == Regime::regB_capped)
    r.lam = P.kb.lam_min;
  if (r.regime == Regime::regC || r.regime == Regime::regC_capped)
    r.lam = P.kb.lam_min_plus;
  return r;
}

inline MomentumSchedule schedule_from_resolved(const ResolvedParams& r) {
  ScheduleParams p;
  p.gamma = r.gamma;
  p.tau = r.tau;
  p.mu_g = r.mu_g;
  p.mu_hconj = r.mu_hconj;
  p.L_f = r.L_f;
  p.lam = r.lam;
  p.K_norm_sq = r.K_norm_sq;
  p.linear_form = r.linear_form;
  MomentumSchedule s(r.regime, p);
  return s;
}

inline Json resolved_to_json(const ResolvedParams& r) {
  MomentumSchedule probe = schedule_from_resolved(r);
  Json j;
  j["gamma"] = r.gamma;
  j["tau"] = r.tau;
  j["nu"] = r.nu;
  j["a_sharp"] = std::isinf(probe.a_sharp()) ? Json() : Json(probe.a_sharp());
  j["lam"] = r.lam;
  j["K_norm_sq"] = r.K_norm_sq;
  j["L_f"] = r.L_f;
  j["mu_g"] = r.mu_g;
  j["mu_hconj"] = r.mu_hconj;
  j["rule"] = r.rule;
  j["regime"] = regime_name(r.regime);
  j["linear_form"] = r.linear_form;
  return j;
}

inline SolveConfig solve_config_from_json(const Json& cfg, Algorithm /*alg*/,
                                          const ProblemInstance& P,
                                          const ResolvedParams& r) {
  SolveConfig sc;
  sc.gamma = r.gamma;
  sc.tau = r.tau;
  sc.schedule = schedule_from_resolved(r);
  sc.max_iters = cfg.value("max_iters", 1000L);
  const Json stop = cfg.value("stop", Json::object());
  const std::string srule = stop.value("rule", "fixed_iters");
  if (srule == "none") sc.stop = StopRule::none;
  else if (srule == "fixed_iters") sc.stop = StopRule::fixed_iters;
  else if (srule == "gap_below") {
    sc.stop = StopRule::gap_below;
    if (!stop.contains("eps")) throw ConfigError("stop.eps: missing");
    sc.stop_eps = stop.at("eps").get<double>();
  } else {
    throw ConfigError("stop.rule: unknown value '" + srule + "'");
  }
  const std::string lvl = cfg.value("check_level", "lyapunov");
  if (lvl == "off") sc.check_level = CheckLevel::off;
  else if (lvl == "lyapunov") sc.check_level = CheckLevel::lyapunov;
  else if (lvl == "full_inequality")
    sc.check_level = CheckLevel::full_inequality;
  else throw ConfigError("check_level: unknown value '" + lvl + "'");
  sc.strict = cfg.value("strict", false);
  sc.final_pgd_polish = cfg.value("final_pgd_polish", false);
  if (cfg.contains("x0")) {
    const Json& x0 = cfg.at("x0");
    if (x0.is_array()) {
      sc.x0 = vec_from_json(x0);
    } else if (x0.is_string() && x0.get<std::string>() == "random") {
      Rng rng(cfg.value("seed", std::uint64_t{0}) ^ 0xc0ffee);
      sc.x0 = rng.normal_vec(P.ref.x_star.size());
    } else if (!(x0.is_string() && x0.get<std::string>() == "zeros")) {
      throw ConfigError("x0: expected 'zeros', 'random', or an array");
    }
  }
  return sc;
}

// ---------------------------------------------------------------------------
// solve / bench / rates entry points (shared by the CLI and by tests)
// ---------------------------------------------------------------------------

struct SolveOutput {
  Json summary;
  std::vector<TraceRecord> records;
};

inline SolveOutput run_solve_config(const Json& cfg) {
  if (!cfg.contains("algorithm")) throw ConfigError("algorithm: missing");
  const Algorithm alg =
      algorithm_from_string(cfg.at("algorithm").get<std::string>());
  ProblemInstance P = instance_from_config(cfg);
  const ResolvedParams r = resolve_params(alg, P, cfg);
  const SolveConfig sc = solve_config_from_json(cfg, alg, P, r);
  RunResult R = run(alg, P, sc);

  Json summary;
  summary["algorithm"] = algorithm_name(alg);
  summary["regime_tag"] = regime_tag_name(P.tag);
  summary["resolved"] = resolved_to_json(r);
  summary["iterations"] = R.iters;
  summary["lyapunov_monotone"] = R.lyapunov_monotone;
  summary["certificates_ok"] = R.certificates_ok;
  summary["e0"] = std::isnan(R.e0) ? Json() : Json(R.e0);
  summary["gap_hit_iter"] = R.gap_hit_iter;
  const TraceRecord& last = R.records.back();
  summary["final"] = {
      {"t", last.t},
      {"lag_gap", std::isnan(last.lag_gap) ? Json() : Json(last.lag_gap)},
      {"primal_gap",
       std::isnan(last.primal_gap) ? Json() : Json(last.primal_gap)},
      {"dist_z_sq", last.dist_z_sq},
      {"dist_v_sq", std::isnan(last.dist_v_sq) ? Json() : Json(last.dist_v_sq)},
      {"feas_sq", std::isnan(last.feas_sq) ? Json() : Json(last.feas_sq)}};

  // best-effort trailing-window rate fit, skipping the momentum warm-up
  // phase (about 2 a# iterations when the schedule is capped)
  Json rates;
  try {
    std::vector<double> gaps, lyaps;
    for (const auto& rec : R.records) {
      gaps.push_back(rec.lag_gap);
      lyaps.push_back(rec.lyap);
    }
    const double a_sharp = sc.schedule ? sc.schedule->a_sharp() : kInf;
    const long warmup =
        std::isinf(a_sharp) ? 0 : static_cast<long>(2.0 * a_sharp);
    const long t_hi = R.iters;
    const long t_lo = std::max<long>({1, t_hi / 2, warmup});
    if (t_hi - t_lo >= 10) {
      const RateFit fg = fit_rate_range(gaps, 0, t_lo, t_hi, gaps.front());
      rates["sublinear_exponent"] = std::isnan(fg.sublinear_exponent)
                                        ? Json()
                                        : Json(fg.sublinear_exponent);
      if (!std::isnan(R.e0)) {
        const RateFit fl = fit_rate_range(lyaps, 0, t_lo, t_hi, R.e0);
        rates["linear_factor"] =
            std::isnan(fl.linear_factor) ? Json() : Json(fl.linear_factor);
      }
    }
  } catch (const InsufficientDataError&) {
    // leave rates absent
  }
  summary["rates"] = rates;
  summary["wall_seconds"] = R.wall_seconds;

  SolveOutput out;
  out.summary = std::move(summary);
  out.records = std::move(R.records);
  return out;
}

struct BenchRow {
  std::string name;
  Json result;  // per-row summary or error record
  bool ok = false;
};

inline int bench_concurrency_cap() {
  if (const char* env = std::getenv("PDOPT_MAX_CONCURRENCY")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs every row of the suite (independent runs may execute concurrently;
// partial failures are recorded per row and the suite continues).
inline std::vector<BenchRow> run_bench_suite(const Json& suite) {
  const Json rows = suite.value("rows", Json::array());
  std::vector<BenchRow> out(rows.size());
  std::atomic<size_t> next{0};
  const int workers =
      std::max(1, std::min<int>(bench_concurrency_cap(),
                                static_cast<int>(rows.size())));
  auto work = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      const Json& row = rows.at(i);
      BenchRow& br = out[i];
      br.name = row.value("name", "row" + std::to_string(i));
      try {
        Json cfg = row;
        if (row.contains("eps")) {
          cfg["stop"] = {{"rule", "gap_below"},
                         {"eps", row.at("eps").get<double>()}};
        }
        SolveOutput so = run_solve_config(cfg);
        br.result = std::move(so.summary);
        br.result["name"] = br.name;
        br.result["iters_to_eps"] = br.result.value("gap_hit_iter", -1L);
        br.ok = true;
      } catch (const std::exception& e) {
        br.result = Json{{"name", br.name}, {"error", e.what()}};
        br.ok = false;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return out;
}

inline void write_bench_csv(const std::vector<BenchRow>& rows,
                            std::ostream& out) {
  out << "name,algorithm,status,iters_to_eps,final_lag_gap,"
         "sublinear_exponent,linear_factor,wall_seconds\n";
  for (const auto& r : rows) {
    auto get_num = [&](const Json& j, const char* k) {
      return j.contains(k) && j.at(k).is_number()
                 ? format_double(j.at(k).get<double>())
                 : std::string("nan");
    };
    out << r.name << ',' << r.result.value("algorithm", "") << ','
        << (r.ok ? "ok" : "error") << ','
        << r.result.value("iters_to_eps", -1L) << ',';
    if (r.ok) {
      const Json& fin = r.result.at("final");
      const Json& rates = r.result.at("rates");
      out << get_num(fin, "lag_gap") << ',' << get_num(rates, "sublinear_exponent")
          << ',' << get_num(rates, "linear_factor") << ','
          << format_double(r.result.value("wall_seconds", 0.0));
    } else {
      out << "nan,nan,nan,nan";
    }
    out << "\n";
  }
}

}  // namespace pdopt
