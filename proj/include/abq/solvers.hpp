#pragma once

#include <optional>

#include "abq/bootstrap.hpp"
#include "abq/mdp.hpp"
#include "abq/task.hpp"
#include "abq/transition.hpp"

namespace abq {

/// A finite task together with the derived objects every solver needs:
/// P_pi, d_mu and q_pi. Immutable after construction.
class EvaluationProblem {
 public:
  explicit EvaluationProblem(FiniteTask task);

  const FiniteTask& task() const { return task_; }
  const Mdp& mdp() const { return task_.mdp; }
  const Policy& target() const { return task_.target; }
  const Policy& behavior() const { return task_.behavior; }
  const FeatureMap& features() const { return task_.features; }
  const MatrixXd& x() const { return task_.features.matrix(); }
  double discount() const { return task_.mdp.discount(); }

  const MatrixXd& target_transition() const { return p_target_; }
  const VectorXd& behavior_weights() const { return d_behavior_.d; }
  const VectorXd& q_pi() const { return q_pi_; }

  /// Lambda diagonal of a scheme evaluated on this task's policies.
  VectorXd lambda_diag(const BootstrapScheme& scheme) const;

 private:
  FiniteTask task_;
  MatrixXd p_target_;
  StateActionDist d_behavior_;
  VectorXd q_pi_;
};

/// Matrices above this reciprocal condition estimate count as invertible.
inline constexpr double kMaxConditionNumber = 1e12;

struct SolutionMatrices {
  MatrixXd a;
  VectorXd b;
  bool invertible = false;
  double condition = 0.0;   // estimated 1-norm condition number of A
  std::optional<VectorXd> w_inf;
};

/// A = X'D(I - gamma lambda P)^{-1}(I - gamma P)X, b = X'D(I - gamma lambda P)^{-1} r.
SolutionMatrices solution_constant_lambda(const EvaluationProblem& problem, double lambda);

/// A_zeta = X'D(I - gamma P Lambda)^{-1}(I - gamma P)X and the matching b_zeta,
/// for any bootstrapping variant.
SolutionMatrices solution_abq(const EvaluationProblem& problem, const BootstrapScheme& scheme);

/// How C = X'DX is inverted. PseudoInverse projects onto the column space of
/// X when the features are linearly dependent (Baird's star).
enum class Projection { Exact, PseudoInverse };

struct MspbeContext {
  MatrixXd c;
  MatrixXd h;
  VectorXd g;
  VectorXd c_inv_g;
};

MspbeContext mspbe_context(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                           const VectorXd& w, Projection projection = Projection::Exact);

/// J(w) = g' C^{-1} g. Throws SingularSystemError for rank-deficient C under
/// Projection::Exact.
double mspbe(const EvaluationProblem& problem, const BootstrapScheme& scheme, const VectorXd& w,
             Projection projection = Projection::Exact);

/// grad J(w) = -2 (g - gamma H' C^{-1} g).
VectorXd mspbe_gradient(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                        const VectorXd& w, Projection projection = Projection::Exact);

/// J(w) with A, b and C^{-1} factored once, for evaluating many weight vectors
/// of the same problem (learning curves).
class MspbeEvaluator {
 public:
  MspbeEvaluator(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                 Projection projection = Projection::Exact);

  double operator()(const VectorXd& w) const;

 private:
  MatrixXd a_;
  VectorXd b_;
  MatrixXd c_inv_;
};

/// b_zeta - A_zeta w, the expected off-line update direction without alpha.
VectorXd expected_update(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                         const VectorXd& w);

/// E = (I - gamma P Lambda)^{-1}(I - gamma P)X.
MatrixXd trace_expectation_matrix(const EvaluationProblem& problem, const BootstrapScheme& scheme);

/// X'D(I - gamma P Lambda)^{-1} P (I - W) X, the stationary expectation of
/// e_t (x-bar_{t+1} - x-tilde_{t+1})'. With W = Lambda this is H.
MatrixXd correction_matrix(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                           CorrectionWeighting weighting);

/// Which product weights the TD errors of a truncated return.
enum class ReturnForm {
  NuPi,       // prod nu_i pi_i
  LambdaRho,  // prod lambda_i rho_i
};

/// wx_t + sum_{n=t}^{t+horizon} gamma^{n-t} (prod_{i=t+1}^{n} c_i) delta_n,
/// stopping early at the end of the episode. Throws ModelError if the
/// trajectory ends before t + horizon without terminating.
double truncated_return(const Trajectory& trajectory, const BootstrapScheme& scheme, const VectorXd& w,
                        size_t t, size_t horizon, ReturnForm form = ReturnForm::NuPi);

/// Smallest H with (gamma * max_trace_factor)^H < 1e-10, capped at 10^4.
size_t default_horizon(double discount, double max_trace_factor);

}  // namespace abq
