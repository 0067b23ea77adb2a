#include "abq/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "abq/errors.hpp"

namespace abq {

namespace {

// X' D as an explicit matrix.
MatrixXd weighted_transpose(const MatrixXd& x, const VectorXd& d) {
  return (x.array().colwise() * d.array()).matrix().transpose();
}

SolutionMatrices finish(MatrixXd a, VectorXd b) {
  SolutionMatrices out;
  Eigen::PartialPivLU<MatrixXd> lu(a);
  const double rcond = lu.rcond();
  out.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  out.invertible = a.allFinite() && std::isfinite(out.condition) && out.condition < kMaxConditionNumber;
  if (out.invertible) {
    VectorXd w = lu.solve(b);
    const double residual = (a * w - b).cwiseAbs().maxCoeff();
    if (w.allFinite() && residual <= 1e-9 * (1.0 + b.cwiseAbs().maxCoeff()))
      out.w_inf = std::move(w);
    else
      out.invertible = false;
  }
  out.a = std::move(a);
  out.b = std::move(b);
  return out;
}

// Solves (I - gamma P Lambda) Y = rhs for the given Lambda diagonal.
MatrixXd solve_bootstrap_system(const EvaluationProblem& problem, const VectorXd& lambda_diag,
                                const MatrixXd& rhs) {
  const MatrixXd& p = problem.target_transition();
  const Index n = p.rows();
  MatrixXd system = MatrixXd::Identity(n, n) - problem.discount() * (p * lambda_diag.asDiagonal());
  Eigen::PartialPivLU<MatrixXd> lu(system);
  return lu.solve(rhs);
}

SolutionMatrices solution_for_lambda(const EvaluationProblem& problem, const VectorXd& lambda_diag) {
  const MatrixXd& p = problem.target_transition();
  const Index n = p.rows();
  const MatrixXd& x = problem.x();
  MatrixXd rhs(n, x.cols() + 1);
  rhs.leftCols(x.cols()) = x - problem.discount() * (p * x);
  rhs.col(x.cols()) = problem.mdp().reward();
  const MatrixXd solved = solve_bootstrap_system(problem, lambda_diag, rhs);
  const MatrixXd xtd = weighted_transpose(x, problem.behavior_weights());
  return finish(xtd * solved.leftCols(x.cols()), xtd * solved.col(x.cols()));
}

struct CovarianceSolver {
  CovarianceSolver(const MatrixXd& c, Projection projection) : projection(projection) {
    if (projection == Projection::PseudoInverse) {
      cod.setThreshold(1e-10);
      cod.compute(c);
      return;
    }
    llt.compute(c);
    const bool ok = llt.info() == Eigen::Success && llt.rcond() > 1.0 / kMaxConditionNumber;
    if (!ok) {
      Eigen::FullPivLU<MatrixXd> lu(c);
      lu.setThreshold(1e-10);
      throw SingularSystemError("feature covariance C = X'DX is rank deficient (rank " +
                                std::to_string(lu.rank()) + " of " + std::to_string(c.rows()) +
                                "); features are linearly dependent under d_mu");
    }
  }

  MatrixXd inverse() const {
    if (projection == Projection::PseudoInverse) return cod.pseudoInverse();
    return llt.solve(MatrixXd::Identity(llt.rows(), llt.cols()));
  }

  VectorXd solve(const VectorXd& v) const {
    return projection == Projection::PseudoInverse ? VectorXd(cod.solve(v)) : VectorXd(llt.solve(v));
  }

  Projection projection;
  Eigen::LLT<MatrixXd> llt;
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod;
};

}  // namespace

EvaluationProblem::EvaluationProblem(FiniteTask task) : task_(std::move(task)) {
  validate(task_);
  p_target_ = target_transition_matrix(task_.mdp, task_.target);
  d_behavior_ = stationary_distribution(task_.mdp, task_.behavior);
  q_pi_ = exact_q_pi(task_.mdp, task_.target);
}

VectorXd EvaluationProblem::lambda_diag(const BootstrapScheme& scheme) const {
  return bootstrap_matrix(scheme, behavior(), target()).diag;
}

SolutionMatrices solution_constant_lambda(const EvaluationProblem& problem, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ModelError("lambda must lie in [0, 1]");
  const MatrixXd& p = problem.target_transition();
  const Index n = p.rows();
  const double gamma = problem.discount();
  const MatrixXd& x = problem.x();
  MatrixXd rhs(n, x.cols() + 1);
  rhs.leftCols(x.cols()) = x - gamma * (p * x);
  rhs.col(x.cols()) = problem.mdp().reward();
  const MatrixXd system = MatrixXd::Identity(n, n) - (gamma * lambda) * p;
  const MatrixXd solved = system.partialPivLu().solve(rhs);
  const MatrixXd xtd = weighted_transpose(x, problem.behavior_weights());
  return finish(xtd * solved.leftCols(x.cols()), xtd * solved.col(x.cols()));
}

SolutionMatrices solution_abq(const EvaluationProblem& problem, const BootstrapScheme& scheme) {
  return solution_for_lambda(problem, problem.lambda_diag(scheme));
}

MspbeContext mspbe_context(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                           const VectorXd& w, Projection projection) {
  const MatrixXd& x = problem.x();
  if (w.size() != x.cols()) throw ModelError("weight vector does not match the feature count");
  const MatrixXd xtd = weighted_transpose(x, problem.behavior_weights());

  MspbeContext ctx;
  ctx.c = xtd * x;
  ctx.h = correction_matrix(problem, scheme, CorrectionWeighting::Lambda);
  // g = X'D (I - gamma P Lambda)^{-1} (r - (I - gamma P) X w)
  const MatrixXd& p = problem.target_transition();
  const VectorXd xw = x * w;
  const VectorXd residual = problem.mdp().reward() - (xw - problem.discount() * (p * xw));
  ctx.g = xtd * solve_bootstrap_system(problem, problem.lambda_diag(scheme), residual);
  ctx.c_inv_g = CovarianceSolver(ctx.c, projection).solve(ctx.g);
  return ctx;
}

double mspbe(const EvaluationProblem& problem, const BootstrapScheme& scheme, const VectorXd& w,
             Projection projection) {
  const MspbeContext ctx = mspbe_context(problem, scheme, w, projection);
  return std::max(0.0, ctx.g.dot(ctx.c_inv_g));
}

VectorXd mspbe_gradient(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                        const VectorXd& w, Projection projection) {
  const MspbeContext ctx = mspbe_context(problem, scheme, w, projection);
  return -2.0 * (ctx.g - problem.discount() * (ctx.h.transpose() * ctx.c_inv_g));
}

MspbeEvaluator::MspbeEvaluator(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                               Projection projection) {
  const SolutionMatrices sol = solution_abq(problem, scheme);
  a_ = sol.a;
  b_ = sol.b;
  const MatrixXd& x = problem.x();
  c_inv_ = CovarianceSolver(weighted_transpose(x, problem.behavior_weights()) * x, projection).inverse();
}

double MspbeEvaluator::operator()(const VectorXd& w) const {
  const VectorXd g = b_ - a_ * w;
  return std::max(0.0, g.dot(c_inv_ * g));
}

VectorXd expected_update(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                         const VectorXd& w) {
  const SolutionMatrices sol = solution_abq(problem, scheme);
  if (w.size() != sol.a.cols()) throw ModelError("weight vector does not match the feature count");
  return sol.b - sol.a * w;
}

MatrixXd trace_expectation_matrix(const EvaluationProblem& problem, const BootstrapScheme& scheme) {
  const MatrixXd& x = problem.x();
  const MatrixXd rhs = x - problem.discount() * (problem.target_transition() * x);
  return solve_bootstrap_system(problem, problem.lambda_diag(scheme), rhs);
}

MatrixXd correction_matrix(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                           CorrectionWeighting weighting) {
  const Policy& mu = problem.behavior();
  const Policy& pi = problem.target();
  const Index n_actions = mu.n_actions();
  VectorXd keep(problem.mdp().n_pairs());
  for (Index s = 0; s < mu.n_states(); ++s)
    for (Index a = 0; a < n_actions; ++a) {
      const double weight = weighting == CorrectionWeighting::Lambda ? scheme.lambda(mu(s, a), pi(s, a))
                                                                     : scheme.nu(mu(s, a), pi(s, a));
      // Pairs with pi = 0 never enter x-tilde, whatever their weight.
      keep(pair_index(s, a, n_actions)) = pi(s, a) == 0.0 ? 1.0 : 1.0 - weight;
    }
  if (!keep.allFinite()) throw ModelError("correction_matrix: unbounded nu on a target-selected pair");
  const MatrixXd& x = problem.x();
  const MatrixXd rhs = problem.target_transition() * (keep.asDiagonal() * x);
  const MatrixXd solved = solve_bootstrap_system(problem, problem.lambda_diag(scheme), rhs);
  return weighted_transpose(x, problem.behavior_weights()) * solved;
}

double truncated_return(const Trajectory& trajectory, const BootstrapScheme& scheme, const VectorXd& w,
                        size_t t, size_t horizon, ReturnForm form) {
  if (t >= trajectory.size()) throw ModelError("truncated_return: start index past the trajectory");
  double total = w.dot(trajectory[t].x);
  double weight = 1.0;
  for (size_t n = t; n <= t + horizon; ++n) {
    if (n >= trajectory.size())
      throw ModelError("truncated_return: trajectory too short for the requested horizon");
    const Transition& tr = trajectory[n];
    if (n > t) {
      const double factor = form == ReturnForm::NuPi
                                ? scheme.trace_factor(tr.behavior_prob, tr.target_prob)
                                : scheme.lambda(tr.behavior_prob, tr.target_prob) * tr.rho();
      weight *= tr.discount * factor;
    }
    total += weight * td_error(tr, w);
    if (tr.terminal) break;
  }
  return total;
}

size_t default_horizon(double discount, double max_trace_factor) {
  constexpr size_t kCap = 10'000;
  const double decay = discount * max_trace_factor;
  if (decay <= 0.0) return 0;
  if (decay >= 1.0) return kCap;
  const double h = std::ceil(std::log(1e-10) / std::log(decay));
  return std::min(kCap, static_cast<size_t>(std::max(0.0, h)));
}

}  // namespace abq
