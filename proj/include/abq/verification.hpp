#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abq/solvers.hpp"

namespace abq {

/// Outcome of one analytic-vs-sampled or analytic-vs-numeric comparison.
/// error and tolerance share units: absolute, relative or a z-score,
/// depending on the check.
struct CheckResult {
  std::string name;
  bool passed = false;
  double error = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Summed off-line forward-view deltas against summed backward-view deltas on
/// random episodes from random MDPs with random schemes. Absolute tolerance.
CheckResult check_forward_backward(std::uint64_t seed, int n_episodes = 200, double tolerance = 1e-10);

/// Mean of delta_t e_t over a stationary behavior run against b - A w.
/// error is the largest |z| over components; batch means give the SE.
CheckResult check_expected_update(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                  const VectorXd& w, long steps, std::uint64_t seed, double n_se = 3.0);

/// Analytic gradient of J against central differences at n_points random w.
/// error is the worst ||fd - grad||_inf / max(||grad||_inf, 1e-12).
CheckResult check_gradient(const EvaluationProblem& problem, const BootstrapScheme& scheme, int n_points,
                           std::uint64_t seed, double tolerance = 1e-5,
                           Projection projection = Projection::Exact);

/// ||grad J(w_inf)||_inf against an absolute tolerance.
CheckResult check_gradient_at_solution(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                       double tolerance = 1e-8);

/// Frozen-w h-iteration with beta_t = 1/t^0.7, repeated over independent
/// stationary replicas; the replica mean is compared with C^{-1} g.
CheckResult check_h_fixed_point(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                const VectorXd& w, int replicas, long steps_per_replica, std::uint64_t seed,
                                double n_se = 3.0);

/// Sampled mean of e_t (x-bar_{t+1} - x-tilde_{t+1})' against
/// correction_matrix for the same weighting.
CheckResult check_correction_matrix(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                    CorrectionWeighting weighting, long steps, std::uint64_t seed,
                                    double n_se = 3.0);

/// With h at its fixed point C^{-1} g, the expected ABQ update under the given
/// weighting is g - gamma M' C^{-1} g for M = correction_matrix(weighting).
/// Passes when that equals -grad J / 2, i.e. the learner descends the MSPBE.
CheckResult check_descends_mspbe(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                 CorrectionWeighting weighting, const VectorXd& w, double tolerance = 1e-10);

struct OracleOptions {
  std::uint64_t seed = 1;
  long sampled_steps = 1'000'000;
};

/// The standard verification battery on the two-state task and a small random
/// MDP; used by the CLI.
std::vector<CheckResult> run_oracle_suite(const OracleOptions& options);

}  // namespace abq
