#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "abq/agents.hpp"
#include "abq/envs/mountain_car.hpp"
#include "abq/envs/random_mdp.hpp"
#include "abq/solvers.hpp"
#include "abq/stats.hpp"

namespace abq {

/// ||Xw - q||^2_D / ||q||^2_D with D = diag(weights); pass ones for the plain
/// Euclidean form. Throws ModelError when ||q||_D is zero.
double nmse(const VectorXd& w, const MatrixXd& x, const VectorXd& q_ref, const VectorXd& weights);

enum class Metric { Nmse, Mspbe };
/// What a run reports as its single number: the mean over the trailing
/// window of its curve, or the last point.
enum class SummaryKind { WindowMean, Final };
enum class Execution { Serial, Parallel };

struct ExperimentConfig {
  std::string task = "two_state";  // two_state | baird | random_mdp | mountain_car | file
  std::string model_path;          // task "file" only
  envs::RandomMdpSpec random_mdp;
  envs::mountain_car::GroundTruthOptions ground_truth;
  std::uint64_t ground_truth_seed = 12345;

  AgentKind agent = AgentKind::Abq;
  std::vector<double> params{0.0};  // zeta, or lambda for GQ
  std::vector<double> alphas{0.01};
  std::vector<double> betas{0.0};
  CorrectionWeighting weighting = CorrectionWeighting::Lambda;

  int n_runs = 1;
  long n_steps = 10'000;    // finite tasks
  long n_episodes = 500;    // mountain car
  long record_every = 1;    // finite tasks: steps between curve points
  std::uint64_t seed = 0;   // run i uses seed + i
  double window = 0.5;      // trailing fraction of the curve averaged
  Metric metric = Metric::Nmse;
  SummaryKind summary = SummaryKind::WindowMean;
  Projection projection = Projection::Exact;
  bool keep_series = false;
};

/// Keys: task, model, random_mdp{seed,n_states,n_actions,n_features,
/// discount,tabular}, ground_truth{seed,behavior_steps,n_pairs,n_rollouts},
/// agent, variant, zeta|lambda, alpha, beta (number or list), weighting,
/// n_runs, n_steps, n_episodes, record_every, seed, window,
/// metric (nmse|mspbe), summary (window|final), projection (exact|pinv),
/// keep_series. Task defaults: baird measures MSPBE with the pseudo-inverse.
ExperimentConfig parse_experiment(std::string_view json_text);
ExperimentConfig load_experiment(const std::filesystem::path& path);

struct SweepPoint {
  double param = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct RunResult {
  SweepPoint point;
  std::uint64_t seed = 0;
  double initial = 0.0;      // metric at the initial weights
  double final = 0.0;
  double window_mean = 0.0;
  double max = 0.0;          // largest curve value seen
  double summary = 0.0;      // per SummaryKind; NaN when diverged
  std::optional<long> diverged_at;
  std::vector<double> series;  // filled when keep_series; starts with initial
};

struct SummaryRow {
  SweepPoint point;
  int run_count = 0;
  int diverged = 0;
  Estimate metric;  // over runs that did not diverge
};

struct ExperimentResult {
  std::vector<RunResult> runs;  // point-major, then by seed
  std::vector<SummaryRow> summary;
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& config);

/// Every (point, run) pair is an independent job. Parallel execution only
/// changes which thread runs a job, never its result or the output order.
ExperimentResult run_experiment(const ExperimentConfig& config, Execution execution = Execution::Parallel);

/// task,agent,zeta_or_lambda,alpha,beta,run_count,diverged,metric_mean,metric_se
std::string summary_csv(const ExperimentConfig& config, const ExperimentResult& result);
/// task,agent,zeta_or_lambda,alpha,beta,seed,point,metric
std::string series_csv(const ExperimentConfig& config, const ExperimentResult& result);

/// Builds the finite task a config names. Throws for mountain_car.
FiniteTask make_finite_task(const ExperimentConfig& config);

/// The scheme an agent runs with at a sweep parameter.
BootstrapScheme scheme_for(AgentKind agent, double param, const std::optional<PsiPivots>& pivots);

}  // namespace abq
