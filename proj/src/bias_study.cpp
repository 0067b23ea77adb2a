#include "abq/bias_study.hpp"

#include <cmath>
#include <exception>
#include <limits>

#include "abq/csv.hpp"
#include "abq/errors.hpp"
#include "abq/stats.hpp"

namespace abq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Consecutive NMSE values may tie up to rounding.
constexpr double kMonotoneSlack = 1e-12;

BiasInstance study_instance(const BiasStudyConfig& config, int index) {
  envs::RandomMdpSpec spec = config.spec;
  spec.seed = config.spec.seed + static_cast<std::uint64_t>(index);
  envs::RandomMdp drawn = envs::random_mdp(spec);
  const EvaluationProblem problem(std::move(drawn.task));

  BiasInstance out;
  out.seed = spec.seed;
  out.resamples = drawn.resamples;
  out.curve = solver_curve(problem, Variant::ConstantLambda, config.lambdas);
  out.monotone = true;
  for (size_t k = 0; k < out.curve.size(); ++k) {
    if (std::isnan(out.curve[k].nmse)) out.invertible = false;
    if (k > 0 && !(out.curve[k].nmse <= out.curve[k - 1].nmse * (1.0 + kMonotoneSlack) + kMonotoneSlack))
      out.monotone = false;
  }
  out.monotone = out.monotone && out.invertible;
  return out;
}

}  // namespace

std::vector<SolverRow> solver_curve(const EvaluationProblem& problem, Variant variant,
                                    const std::vector<double>& grid, Projection projection) {
  std::vector<SolverRow> rows;
  const VectorXd& q = problem.q_pi();
  const VectorXd& d = problem.behavior_weights();
  const double q_norm = d.dot(q.cwiseAbs2());
  for (double param : grid) {
    SolverRow row;
    row.scheme = std::string(to_string(variant));
    row.param = param;
    BootstrapScheme scheme = BootstrapScheme::constant_lambda(0.0);
    switch (variant) {
      case Variant::Abq: scheme = BootstrapScheme::abq(param, problem.behavior(), problem.target()); break;
      case Variant::AbTrace: scheme = BootstrapScheme::ab_trace(param); break;
      case Variant::ConstantLambda: scheme = BootstrapScheme::constant_lambda(param); break;
      case Variant::TreeBackup: scheme = BootstrapScheme::tree_backup(param); break;
    }
    const SolutionMatrices sol = variant == Variant::ConstantLambda ? solution_constant_lambda(problem, param)
                                                                    : solution_abq(problem, scheme);
    row.cond_a = sol.condition;
    if (sol.w_inf) {
      // A zero q_pi (Baird) leaves NMSE undefined; report the raw error instead.
      const double err = d.dot((problem.x() * *sol.w_inf - q).cwiseAbs2());
      row.nmse = q_norm > 0.0 ? err / q_norm : err;
      row.mspbe_at_winf = mspbe(problem, scheme, *sol.w_inf, projection);
    } else {
      row.nmse = row.mspbe_at_winf = kNaN;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string solver_csv(const std::vector<SolverRow>& rows) {
  std::string out = "scheme,zeta_or_lambda,nmse,mspbe_at_winf,cond_A\n";
  for (const SolverRow& r : rows)
    append_csv_row(out, {r.scheme, csv_number(r.param), csv_number(r.nmse), csv_number(r.mspbe_at_winf),
                         csv_number(r.cond_a)});
  return out;
}

BiasStudyResult bias_study(const BiasStudyConfig& config, Execution execution) {
  if (config.n_instances < 1) throw ModelError("bias_study needs at least one instance");
  if (config.lambdas.size() < 2) throw ModelError("bias_study needs at least two grid points");
  const size_t n = static_cast<size_t>(config.n_instances);
  BiasStudyResult result;
  result.instances.resize(n);
  std::vector<std::exception_ptr> errors(n);
  auto job = [&](size_t i) {
    try {
      result.instances[i] = study_instance(config, static_cast<int>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (execution == Execution::Parallel) {
    const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) job(static_cast<size_t>(i));
  } else {
    for (size_t i = 0; i < n; ++i) job(i);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<double> first, last;
  for (const BiasInstance& inst : result.instances) {
    if (!inst.invertible) continue;
    ++result.eligible;
    if (inst.monotone) ++result.monotone;
    first.push_back(inst.curve.front().nmse);
    last.push_back(inst.curve.back().nmse);
  }
  result.median_first = first.empty() ? kNaN : median(first);
  result.median_last = last.empty() ? kNaN : median(last);
  return result;
}

std::string bias_study_csv(const BiasStudyResult& result) {
  std::string out = "instance,seed,resamples,scheme,zeta_or_lambda,nmse,mspbe_at_winf,cond_A\n";
  for (size_t i = 0; i < result.instances.size(); ++i) {
    const BiasInstance& inst = result.instances[i];
    for (const SolverRow& r : inst.curve)
      append_csv_row(out, {std::to_string(i), std::to_string(inst.seed), std::to_string(inst.resamples), r.scheme,
                           csv_number(r.param), csv_number(r.nmse), csv_number(r.mspbe_at_winf),
                           csv_number(r.cond_a)});
  }
  return out;
}

}  // namespace abq
