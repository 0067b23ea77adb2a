#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "abq/envs/random_mdp.hpp"
#include "abq/harness.hpp"
#include "abq/solvers.hpp"

namespace abq {

/// One point of an exact-solution curve.
struct SolverRow {
  std::string scheme;  // "constant", "abq", "abtrace", "treebackup"
  double param = 0.0;
  double nmse = 0.0;             // NaN when A is not invertible
  double mspbe_at_winf = 0.0;    // NaN when A is not invertible
  double cond_a = 0.0;
};

/// Asymptotic solutions of one bootstrapping family over a parameter grid.
/// Constant lambda goes through solution_constant_lambda, the others through
/// solution_abq.
std::vector<SolverRow> solver_curve(const EvaluationProblem& problem, Variant variant,
                                    const std::vector<double>& grid,
                                    Projection projection = Projection::Exact);

/// scheme,zeta_or_lambda,nmse,mspbe_at_winf,cond_A
std::string solver_csv(const std::vector<SolverRow>& rows);

struct BiasStudyConfig {
  int n_instances = 50;
  std::vector<double> lambdas{0.0, 0.25, 0.5, 0.75, 1.0};
  envs::RandomMdpSpec spec;  // spec.seed is the base; instance i uses base + i
};

struct BiasInstance {
  std::uint64_t seed = 0;
  int resamples = 0;
  std::vector<SolverRow> curve;
  bool invertible = true;  // A invertible at every grid point
  bool monotone = false;   // NMSE nonincreasing along the grid
};

struct BiasStudyResult {
  std::vector<BiasInstance> instances;
  int eligible = 0;  // instances with A invertible everywhere
  int monotone = 0;
  double median_first = 0.0;  // median NMSE at the first grid point, eligible only
  double median_last = 0.0;
};

/// NMSE of the constant-lambda solution on seeded random MDPs.
BiasStudyResult bias_study(const BiasStudyConfig& config, Execution execution = Execution::Parallel);

/// instance,seed,resamples,scheme,zeta_or_lambda,nmse,mspbe_at_winf,cond_A
std::string bias_study_csv(const BiasStudyResult& result);

}  // namespace abq
