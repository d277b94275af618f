// pdopt command-line front end: solve single configs, run benchmark suites,
// execute the verification suite, and fit rates from trace files.
// Exit codes: 0 ok, 1 config error, 2 verification failure, 3 I/O error.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pdopt/acceptance.hpp"
#include "pdopt/harness.hpp"

namespace {

pdopt::Json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw pdopt::IoError("cannot open " + path);
  pdopt::Json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw pdopt::IoError("parse error in " + path + ": " + e.what());
  }
  return j;
}

int cmd_solve(const std::string& config_path) {
  const pdopt::Json cfg = load_json(config_path);
  pdopt::SolveOutput out = pdopt::run_solve_config(cfg);
  const pdopt::Json outputs = cfg.value("output", pdopt::Json::object());
  const std::string trace_path = outputs.value("trace_csv", "trace.csv");
  const std::string summary_path = outputs.value("summary_json", "summary.json");
  pdopt::write_trace_csv(out.records, trace_path);
  std::ofstream sf(summary_path);
  if (!sf) throw pdopt::IoError("cannot write " + summary_path);
  sf << out.summary.dump(2) << "\n";
  std::cout << out.summary.dump(2) << std::endl;
  if (cfg.value("strict", false) &&
      (!out.summary.value("certificates_ok", true) ||
       !out.summary.value("lyapunov_monotone", true)))
    return 2;
  return 0;
}

int cmd_bench(const std::string& suite_path) {
  const pdopt::Json suite = load_json(suite_path);
  const auto rows = pdopt::run_bench_suite(suite);
  const std::string csv_path = suite.value("output_csv", "bench.csv");
  const std::string json_path = suite.value("output_json", "bench.json");
  {
    std::ofstream f(csv_path);
    if (!f) throw pdopt::IoError("cannot write " + csv_path);
    pdopt::write_bench_csv(rows, f);
  }
  pdopt::Json arr = pdopt::Json::array();
  for (const auto& r : rows) arr.push_back(r.result);
  {
    std::ofstream f(json_path);
    if (!f) throw pdopt::IoError("cannot write " + json_path);
    f << arr.dump(2) << "\n";
  }
  pdopt::write_bench_csv(rows, std::cout);
  return 0;
}

int cmd_verify(const std::string& level) {
  const auto lvl = level == "full" ? pdopt::acceptance::Level::full
                                   : pdopt::acceptance::Level::fast;
  const auto results = pdopt::acceptance::run_all(lvl);
  const bool ok = pdopt::acceptance::print_report(results, std::cout);
  return ok ? 0 : 2;
}

int cmd_rates(const std::string& trace_path, long window) {
  const auto recs = pdopt::read_trace_csv(trace_path);
  std::vector<double> gaps, lyaps;
  bool any_gap = false;
  for (const auto& r : recs) {
    gaps.push_back(r.lag_gap);
    lyaps.push_back(r.lyap);
    any_gap = any_gap || !std::isnan(r.lag_gap);
  }
  if (!any_gap)
    for (size_t i = 0; i < recs.size(); ++i) gaps[i] = recs[i].primal_gap;
  const long t0 = recs.front().t;
  const double scale = gaps.front();
  pdopt::Json j;
  const pdopt::RateFit fg = pdopt::fit_rate(gaps, t0, window, scale);
  j["sublinear_exponent"] = std::isnan(fg.sublinear_exponent)
                                ? pdopt::Json()
                                : pdopt::Json(fg.sublinear_exponent);
  try {
    const pdopt::RateFit fl = pdopt::fit_rate(lyaps, t0, window,
                                              lyaps.front());
    j["linear_factor"] = std::isnan(fl.linear_factor)
                             ? pdopt::Json()
                             : pdopt::Json(fl.linear_factor);
  } catch (const pdopt::Error&) {
    j["linear_factor"] = pdopt::Json();
  }
  j["window"] = window;
  std::cout << j.dump(2) << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"first-order primal-dual solvers with per-iteration certificates"};
  app.require_subcommand(1);

  std::string config_path, suite_path, trace_path;
  std::string level = "fast";
  long window = 100;

  auto* solve = app.add_subcommand("solve", "run one algorithm from a JSON config");
  solve->add_option("config", config_path, "config JSON path")->required();

  auto* bench = app.add_subcommand("bench", "run a benchmark suite");
  bench->add_option("suite", suite_path, "suite JSON path")->required();

  auto* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("--level", level, "fast|full")
      ->check(CLI::IsMember({"fast", "full"}));

  auto* rates = app.add_subcommand("rates", "fit rates from a trace CSV");
  rates->add_option("trace", trace_path, "trace CSV path")->required();
  rates->add_option("--window", window, "trailing window length");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(config_path);
    if (bench->parsed()) return cmd_bench(suite_path);
    if (verify->parsed()) return cmd_verify(level);
    if (rates->parsed()) return cmd_rates(trace_path, window);
  } catch (const pdopt::VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << std::endl;
    return 2;
  } catch (const pdopt::IoError& e) {
    std::cerr << "i/o error: " << e.what() << std::endl;
    return 3;
  } catch (const pdopt::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
