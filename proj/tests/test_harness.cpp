#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "abq/bias_study.hpp"
#include "abq/csv.hpp"
#include "abq/envs/baird.hpp"
#include "abq/envs/two_state.hpp"
#include "abq/errors.hpp"
#include "abq/harness.hpp"
#include "abq/stats.hpp"

using namespace abq;

namespace {

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("nmse") {
  MatrixXd x(3, 2);
  x << 1, 0,
       0, 1,
       1, 1;
  const VectorXd w = VectorXd::Constant(2, 1.0);
  const VectorXd q = x * w;
  const VectorXd ones = VectorXd::Ones(3);
  CHECK(nmse(w, x, q, ones) == 0.0);
  CHECK(nmse(VectorXd::Zero(2), x, q, ones) == 1.0);
  // Xw - q = (1, 0, 1) against ||q||^2 = 6; weights pick the rows.
  CHECK(nmse(VectorXd::Constant(2, 2.0), x, q, ones) == doctest::Approx(6.0 / 6.0));
  const VectorXd d = (VectorXd(3) << 0.5, 0.5, 0.0).finished();
  CHECK(nmse(VectorXd::Constant(2, 2.0), x, q, d) == doctest::Approx(1.0));
  CHECK(nmse((VectorXd(2) << 2.0, 1.0).finished(), x, q, ones) == doctest::Approx(2.0 / 6.0));
  CHECK_THROWS_AS(nmse(w, x, VectorXd::Zero(3), ones), ModelError);
  CHECK_THROWS_AS(nmse(w, x, VectorXd::Zero(2), VectorXd::Ones(2)), ModelError);
}

TEST_CASE("csv numbers and statistics") {
  CHECK(csv_number(0.1) == "0.1");
  CHECK(csv_number(-2.5e-20) == "-2.5e-20");
  CHECK(csv_number(3.0) == "3");
  CHECK(csv_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(csv_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(std::stod(csv_number(1.0 / 3.0)) == 1.0 / 3.0);
  std::string row;
  append_csv_row(row, {"a", "1", "x y"});
  CHECK(row == "a,1,x y\n");

  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const Estimate e = summarize(v);
  CHECK(e.mean == 2.5);
  CHECK(e.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(summarize(std::vector<double>{7.0}).se == 0.0);
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);

  BatchMeans bm(1, 2);
  for (double z : {1.0, 3.0, 5.0, 7.0, 100.0}) bm.add(VectorXd::Constant(1, z));
  CHECK(bm.completed_batches() == 2);
  CHECK(bm.mean()(0) == 4.0);
  CHECK(bm.standard_error()(0) == doctest::Approx(2.0));
}

TEST_CASE("experiment configs") {
  const ExperimentConfig d = parse_experiment("{}");
  CHECK(d.task == "two_state");
  CHECK(d.agent == AgentKind::Abq);
  CHECK(d.metric == Metric::Nmse);

  const ExperimentConfig b = parse_experiment(R"({"task": "baird", "zeta": [0, 0.5], "alpha": 0.05})");
  CHECK(b.metric == Metric::Mspbe);
  CHECK(b.summary == SummaryKind::Final);
  CHECK(b.projection == Projection::PseudoInverse);
  CHECK(b.params == std::vector<double>{0.0, 0.5});
  CHECK(b.alphas == std::vector<double>{0.05});

  const ExperimentConfig g = parse_experiment(
      R"({"agent": "gq", "variant": "constant", "lambda": [0.4, 0.9], "beta": [0.0, 0.1], "n_runs": 3,
          "weighting": "nu", "summary": "final", "random_mdp": {"n_states": 7, "tabular": true}})");
  CHECK(g.agent == AgentKind::Gq);
  CHECK(g.params.size() == 2);
  CHECK(g.weighting == CorrectionWeighting::Nu);
  CHECK(g.random_mdp.n_states == 7);
  CHECK(g.random_mdp.tabular);
  CHECK(sweep_points(g).size() == 4);

  CHECK_THROWS_AS(parse_experiment("{"), ModelError);
  CHECK_THROWS_AS(parse_experiment("[1, 2]"), ModelError);
  CHECK_THROWS_AS(parse_experiment(R"({"agent": "sarsa"})"), ModelError);
  CHECK_THROWS_AS(parse_experiment(R"({"agent": "gq", "variant": "abq"})"), ModelError);
  CHECK_THROWS_AS(parse_experiment(R"({"zeta": 1.5})"), ModelError);
  CHECK_THROWS_AS(parse_experiment(R"({"alpha": 0})"), ModelError);
  CHECK_THROWS_AS(parse_experiment(R"({"alpha": "big"})"), ModelError);
  CHECK_THROWS_AS(parse_experiment(R"({"n_runs": 0})"), ModelError);
  CHECK_THROWS_AS(parse_experiment(R"({"metric": "rmse"})"), ModelError);
  CHECK_THROWS_AS(parse_experiment(R"({"window": 0})"), ModelError);
  CHECK_THROWS_AS(load_experiment("/nonexistent/config.json"), ModelError);
}

TEST_CASE("tasks and schemes by name") {
  ExperimentConfig c;
  c.task = "baird";
  CHECK(make_finite_task(c).name == "baird");
  c.task = "random_mdp";
  c.random_mdp.n_states = 5;
  c.random_mdp.n_actions = 2;
  c.random_mdp.n_features = 3;
  CHECK(make_finite_task(c).mdp.n_states() == 5);
  c.task = "mountain_car";
  CHECK_THROWS_AS(make_finite_task(c), ModelError);
  c.task = "file";
  c.model_path = "/nonexistent.json";
  CHECK_THROWS(make_finite_task(c));

  CHECK(scheme_for(AgentKind::Gq, 0.3, std::nullopt).variant() == Variant::ConstantLambda);
  CHECK(scheme_for(AgentKind::Abq, 0.3, PsiPivots{1.1, 10.0}).variant() == Variant::Abq);
  CHECK(scheme_for(AgentKind::TreeBackup, 0.3, std::nullopt).variant() == Variant::TreeBackup);

  ExperimentConfig tb;
  tb.agent = AgentKind::TreeBackup;
  CHECK_THROWS_AS(run_experiment(tb), ModelError);
}

TEST_CASE("serial and parallel sweeps write identical bytes") {
  ExperimentConfig c = parse_experiment(
      R"({"zeta": [0, 0.5, 1], "alpha": [0.01, 0.05], "beta": 0.01, "n_runs": 3, "n_steps": 2000,
          "record_every": 100, "keep_series": true, "seed": 9})");
  const ExperimentResult a = run_experiment(c, Execution::Serial);
  const ExperimentResult b = run_experiment(c, Execution::Parallel);
  CHECK(summary_csv(c, a) == summary_csv(c, b));
  CHECK(series_csv(c, a) == series_csv(c, b));

  const auto rows = lines(summary_csv(c, a));
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "task,agent,zeta_or_lambda,alpha,beta,run_count,diverged,metric_mean,metric_se");
  CHECK(rows[1].rfind("two_state,abq,0,0.01,0.01,3,0,", 0) == 0);
  CHECK(lines(series_csv(c, a))[0] == "task,agent,zeta_or_lambda,alpha,beta,seed,point,metric");

  REQUIRE(a.runs.size() == 18);
  for (const RunResult& r : a.runs) {
    CHECK(r.series.size() == 21);
    CHECK(r.series.front() == r.initial);
    CHECK(r.series.back() == r.final);
    // Window 0.5 of 20 recorded points: the last ten.
    double tail = 0.0;
    for (size_t i = 11; i < 21; ++i) tail += r.series[i];
    CHECK(r.window_mean == doctest::Approx(tail / 10.0).epsilon(1e-14));
    CHECK(r.summary == r.window_mean);
  }
  CHECK(a.runs[0].seed == 9);
  CHECK(a.runs[2].seed == 11);
  CHECK(a.runs[3].seed == 9);
}

TEST_CASE("a seed repeated gives the same run") {
  ExperimentConfig c = parse_experiment(R"({"zeta": 0.5, "alpha": 0.05, "beta": 0.01, "n_steps": 500, "seed": 4})");
  const ExperimentResult a = run_experiment(c), b = run_experiment(c);
  CHECK(a.runs[0].final == b.runs[0].final);
  c.seed = 5;
  CHECK(run_experiment(c).runs[0].final != a.runs[0].final);
}

TEST_CASE("diverged runs are counted, not averaged") {
  ExperimentConfig c = parse_experiment(
      R"({"agent": "gq", "lambda": 0.9, "alpha": [0.01, 0.5], "beta": 0.0, "n_runs": 2, "n_steps": 100000})");
  const ExperimentResult r = run_experiment(c);
  REQUIRE(r.summary.size() == 2);
  CHECK(r.summary[0].diverged == 0);
  CHECK(r.summary[1].diverged == 2);
  CHECK(r.summary[1].metric.n == 0);
  for (const RunResult& run : r.runs)
    if (run.point.alpha == 0.5) {
      CHECK(run.diverged_at.has_value());
      CHECK(std::isnan(run.summary));
    }
  const auto rows = lines(summary_csv(c, r));
  CHECK(rows[2].find(",2,2,") != std::string::npos);
}

TEST_CASE("mspbe curves on Baird") {
  ExperimentConfig c = parse_experiment(R"({"task": "baird", "zeta": 0.5, "alpha": 0.05, "beta": 0.1,
                                            "n_steps": 5000, "record_every": 1000})");
  const ExperimentResult r = run_experiment(c);
  CHECK(r.runs[0].initial > 1.0);
  CHECK(r.runs[0].summary < 0.01 * r.runs[0].initial);
  CHECK(r.runs[0].summary == r.runs[0].final);
}

TEST_CASE("solver curves") {
  const EvaluationProblem two(envs::two_state());
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto rows = solver_curve(two, Variant::ConstantLambda, grid);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].nmse > rows[2].nmse);
  for (const SolverRow& row : rows) {
    CHECK(row.scheme == "constant");
    CHECK(row.mspbe_at_winf <= 1e-12);
  }
  const auto csv = lines(solver_csv(rows));
  CHECK(csv[0] == "scheme,zeta_or_lambda,nmse,mspbe_at_winf,cond_A");
  CHECK(csv.size() == 4);

  const EvaluationProblem baird(envs::baird());
  const auto b = solver_curve(baird, Variant::Abq, grid, Projection::PseudoInverse);
  CHECK(std::isnan(b[0].nmse));
}

TEST_CASE("bias study") {
  BiasStudyConfig c;
  c.n_instances = 6;
  c.spec.n_states = 8;
  c.spec.n_actions = 2;
  c.spec.n_features = 5;
  c.spec.seed = 100;
  const BiasStudyResult a = bias_study(c, Execution::Serial);
  const BiasStudyResult b = bias_study(c, Execution::Parallel);
  CHECK(bias_study_csv(a) == bias_study_csv(b));
  CHECK(a.instances.size() == 6);
  CHECK(a.instances[3].seed == 103);
  CHECK(lines(bias_study_csv(a)).size() == 1 + 6 * 5);
  CHECK(a.eligible <= 6);
  CHECK(a.monotone <= a.eligible);

  // Tabular features: every lambda recovers q_pi.
  c.spec.tabular = true;
  const BiasStudyResult t = bias_study(c);
  CHECK(t.eligible == 6);
  for (const BiasInstance& inst : t.instances)
    for (const SolverRow& row : inst.curve) CHECK(row.nmse <= 1e-16);
}

TEST_CASE("paper-size bias study does not depend on the thread count") {
  // ctest runs this binary with OMP_NUM_THREADS=4; 100 x 5 x 40 is large
  // enough for any threaded matrix product to change rounding.
  BiasStudyConfig c;
  c.n_instances = 3;
  c.spec.seed = 500;
  CHECK(bias_study_csv(bias_study(c, Execution::Serial)) == bias_study_csv(bias_study(c, Execution::Parallel)));
}
