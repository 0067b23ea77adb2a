// Command-line front end: exact solution curves, single runs, sweeps and the
// verification battery.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "abq/bias_study.hpp"
#include "abq/errors.hpp"
#include "abq/harness.hpp"
#include "abq/verification.hpp"

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw abq::ModelError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw abq::ModelError("cannot write " + out);
  file << text;
}

std::vector<double> grid_from(const json& doc) {
  if (auto it = doc.find("grid"); it != doc.end()) return it->get<std::vector<double>>();
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

int cmd_solve(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out) {
  const std::string text = slurp(config_path);
  const json doc = json::parse(text);
  abq::ExperimentConfig cfg = abq::parse_experiment(text);
  if (seed) cfg.random_mdp.seed = *seed;

  if (doc.contains("n_instances")) {
    abq::BiasStudyConfig study;
    study.n_instances = doc["n_instances"].get<int>();
    if (doc.contains("grid")) study.lambdas = doc["grid"].get<std::vector<double>>();
    study.spec = cfg.random_mdp;
    const abq::BiasStudyResult result = abq::bias_study(study);
    emit(abq::bias_study_csv(result), out);
    std::fprintf(stderr, "monotone %d of %d eligible instances; median NMSE %.6g -> %.6g\n", result.monotone,
                 result.eligible, result.median_first, result.median_last);
    return 0;
  }

  const abq::EvaluationProblem problem(abq::make_finite_task(cfg));
  std::vector<std::string> variants{"constant", "abq"};
  if (auto it = doc.find("variants"); it != doc.end()) variants = it->get<std::vector<std::string>>();
  std::vector<abq::SolverRow> rows;
  for (const std::string& name : variants) {
    auto curve = abq::solver_curve(problem, abq::parse_variant(name), grid_from(doc), cfg.projection);
    rows.insert(rows.end(), curve.begin(), curve.end());
  }
  emit(abq::solver_csv(rows), out);
  return 0;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out) {
  abq::ExperimentConfig cfg = abq::load_experiment(config_path);
  if (seed) cfg.seed = *seed;
  if (abq::sweep_points(cfg).size() != 1)
    throw abq::ModelError("run takes a single zeta/lambda, alpha and beta; use experiment for sweeps");
  cfg.n_runs = 1;
  cfg.keep_series = true;
  const abq::ExperimentResult result = abq::run_experiment(cfg);
  emit(abq::series_csv(cfg, result), out);
  const abq::RunResult& run = result.runs.front();
  if (run.diverged_at) std::fprintf(stderr, "diverged at step %ld\n", *run.diverged_at);
  return 0;
}

int cmd_experiment(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out,
                   const std::string& series, bool serial) {
  abq::ExperimentConfig cfg = abq::load_experiment(config_path);
  if (seed) cfg.seed = *seed;
  if (!series.empty()) cfg.keep_series = true;
  const abq::ExperimentResult result =
      abq::run_experiment(cfg, serial ? abq::Execution::Serial : abq::Execution::Parallel);
  emit(abq::summary_csv(cfg, result), out);
  if (!series.empty()) emit(abq::series_csv(cfg, result), series);
  return 0;
}

int cmd_oracle(std::optional<std::uint64_t> seed, long steps, const std::string& out) {
  abq::OracleOptions options;
  if (seed) options.seed = *seed;
  options.sampled_steps = steps;
  std::string report;
  bool ok = true;
  for (const abq::CheckResult& r : abq::run_oracle_suite(options)) {
    char line[512];
    std::snprintf(line, sizeof line, "%s %s: error %.3g (tolerance %.3g)\n", r.passed ? "PASS" : "FAIL",
                  r.name.c_str(), r.error, r.tolerance);
    report += line;
    if (!r.passed && !r.detail.empty()) report += "     " + r.detail + "\n";
    ok = ok && r.passed;
  }
  emit(report, out);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-policy TD laboratory: exact solutions, learning runs and oracles"};
  app.require_subcommand(1);

  std::string config, out, series;
  std::optional<std::uint64_t> seed;
  long steps = 1'000'000;
  bool serial = false;

  auto* solve = app.add_subcommand("solve", "exact asymptotic solutions over a zeta/lambda grid");
  solve->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  solve->add_option("--seed", seed, "random_mdp seed override");
  solve->add_option("--out", out, "CSV output path (stdout when omitted)");

  auto* run = app.add_subcommand("run", "one learning run with its full curve");
  run->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "run seed");
  run->add_option("--out", out, "series CSV output path");

  auto* experiment = app.add_subcommand("experiment", "seeded multi-run sweep");
  experiment->add_option("--config", config, "JSON config")->required()->check(CLI::ExistingFile);
  experiment->add_option("--seed", seed, "seed base");
  experiment->add_option("--out", out, "summary CSV output path");
  experiment->add_option("--series", series, "also write per-run curves here");
  experiment->add_flag("--serial", serial, "run jobs on one thread");

  auto* oracle = app.add_subcommand("oracle", "verification battery; exits 1 on any failure");
  oracle->add_option("--seed", seed, "seed");
  oracle->add_option("--steps", steps, "length of sampled runs")->check(CLI::PositiveNumber);
  oracle->add_option("--out", out, "report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(config, seed, out);
    if (*run) return cmd_run(config, seed, out);
    if (*experiment) return cmd_experiment(config, seed, out, series, serial);
    if (*oracle) return cmd_oracle(seed, steps, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
