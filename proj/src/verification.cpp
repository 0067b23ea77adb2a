#include "abq/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "abq/agents.hpp"
#include "abq/envs/random_mdp.hpp"
#include "abq/envs/two_state.hpp"
#include "abq/errors.hpp"
#include "abq/sampling.hpp"
#include "abq/stats.hpp"

namespace abq {

namespace {

constexpr long kBurnIn = 1000;
constexpr size_t kBatches = 200;

Rng seeded(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

VectorXd random_vector(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

BootstrapScheme random_scheme(const FiniteTask& task, Rng& rng) {
  const double p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: return BootstrapScheme::abq(p, task.behavior, task.target);
    case 1: return BootstrapScheme::ab_trace(p);
    case 2: return BootstrapScheme::constant_lambda(p);
    default: return BootstrapScheme::tree_backup(p);
  }
}

double max_abs_z(const VectorXd& estimate, const VectorXd& se, const VectorXd& truth) {
  double worst = 0.0;
  for (Index i = 0; i < truth.size(); ++i) {
    const double diff = std::abs(estimate(i) - truth(i));
    // A component with zero spread must match exactly.
    const double z = se(i) > 0.0 ? diff / se(i) : (diff > 1e-12 ? INFINITY : 0.0);
    worst = std::max(worst, z);
  }
  return worst;
}

std::string describe(const char* label, const VectorXd& estimate, const VectorXd& truth) {
  std::ostringstream os;
  os.precision(6);
  os << label << " sampled=[" << estimate.transpose() << "] exact=[" << truth.transpose() << "]";
  return os.str();
}

// Stationary sampler with a warmed-up trace for the given scheme.
struct WarmStream {
  WarmStream(const EvaluationProblem& problem, const BootstrapScheme& scheme, Rng::result_type seed)
      : sampler(problem.task(), seed, problem.behavior_weights()), scheme(scheme),
        e(VectorXd::Zero(problem.x().cols())) {
    for (long t = 0; t < kBurnIn; ++t) advance();
  }

  const Transition& advance() {
    tr = sampler.next();
    e = tr.discount * scheme.trace_factor(tr.behavior_prob, tr.target_prob) * e + tr.x;
    return tr;
  }

  FiniteSampler sampler;
  const BootstrapScheme& scheme;
  VectorXd e;
  Transition tr;
};

}  // namespace

CheckResult check_forward_backward(std::uint64_t seed, int n_episodes, double tolerance) {
  CheckResult out{"forward/backward equivalence", true, 0.0, tolerance, ""};
  Rng rng = seeded(seed, 0);
  for (int i = 0; i < n_episodes; ++i) {
    envs::RandomMdpSpec spec;
    spec.n_states = std::uniform_int_distribution<Index>(1, 6)(rng);
    spec.n_actions = std::uniform_int_distribution<Index>(1, 3)(rng);
    spec.n_features = std::uniform_int_distribution<Index>(1, spec.n_states * spec.n_actions)(rng);
    spec.discount = std::uniform_real_distribution<double>(0.0, 0.99)(rng);
    spec.seed = rng();
    const FiniteTask task = envs::random_mdp(spec).task;
    const BootstrapScheme scheme = random_scheme(task, rng);
    const VectorXd w = random_vector(task.features.n_features(), rng);

    FiniteSampler sampler(task, rng(), std::uniform_int_distribution<Index>(0, spec.n_states - 1)(rng));
    const size_t length = std::uniform_int_distribution<size_t>(1, 50)(rng);
    Trajectory episode = sampler.take(length);
    if (std::bernoulli_distribution(0.5)(rng)) {
      episode.back().terminal = true;
      episode.back().next = nullptr;
    }

    VectorXd forward = VectorXd::Zero(w.size()), backward = VectorXd::Zero(w.size());
    for (const VectorXd& d : offline_forward_deltas(episode, scheme, w, 0.1)) forward += d;
    for (const VectorXd& d : offline_backward_deltas(episode, scheme, w, 0.1)) backward += d;
    const double err = (forward - backward).cwiseAbs().maxCoeff();
    if (err > out.error) {
      out.error = err;
      out.detail = "worst episode " + std::to_string(i) + " (" + std::string(to_string(scheme.variant())) +
                   ", length " + std::to_string(length) + ")";
    }
  }
  out.passed = out.error <= tolerance;
  return out;
}

CheckResult check_expected_update(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                  const VectorXd& w, long steps, std::uint64_t seed, double n_se) {
  const VectorXd exact = expected_update(problem, scheme, w);
  WarmStream stream(problem, scheme, seed);
  BatchMeans batches(w.size(), static_cast<size_t>(std::max<long>(1, steps / static_cast<long>(kBatches))));
  for (long t = 0; t < steps; ++t) {
    const Transition& tr = stream.advance();
    batches.add(td_error(tr, w) * stream.e);
  }
  CheckResult out{"expected update", false, 0.0, n_se, ""};
  out.error = max_abs_z(batches.mean(), batches.standard_error(), exact);
  out.passed = out.error <= n_se;
  out.detail = describe("b-Aw", batches.mean(), exact);
  return out;
}

CheckResult check_gradient(const EvaluationProblem& problem, const BootstrapScheme& scheme, int n_points,
                           std::uint64_t seed, double tolerance, Projection projection) {
  CheckResult out{"gradient vs finite differences", true, 0.0, tolerance, ""};
  Rng rng = seeded(seed, 1);
  const Index n = problem.x().cols();
  for (int k = 0; k < n_points; ++k) {
    const VectorXd w = 3.0 * random_vector(n, rng);
    const VectorXd grad = mspbe_gradient(problem, scheme, w, projection);
    VectorXd fd(n);
    for (Index i = 0; i < n; ++i) {
      const double h = 1e-6 * (1.0 + std::abs(w(i)));
      VectorXd up = w, down = w;
      up(i) += h;
      down(i) -= h;
      fd(i) = (mspbe(problem, scheme, up, projection) - mspbe(problem, scheme, down, projection)) / (2.0 * h);
    }
    const double err = (fd - grad).cwiseAbs().maxCoeff() / std::max(grad.cwiseAbs().maxCoeff(), 1e-12);
    out.error = std::max(out.error, err);
  }
  out.passed = out.error <= tolerance;
  return out;
}

CheckResult check_gradient_at_solution(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                       double tolerance) {
  CheckResult out{"gradient at the fixed point", false, 0.0, tolerance, ""};
  const SolutionMatrices sol = solution_abq(problem, scheme);
  if (!sol.w_inf) {
    out.error = INFINITY;
    out.detail = "A is not invertible";
    return out;
  }
  out.error = mspbe_gradient(problem, scheme, *sol.w_inf).cwiseAbs().maxCoeff();
  out.passed = out.error <= tolerance;
  return out;
}

CheckResult check_h_fixed_point(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                const VectorXd& w, int replicas, long steps_per_replica, std::uint64_t seed,
                                double n_se) {
  const MspbeContext ctx = mspbe_context(problem, scheme, w);
  const Index n = w.size();
  MatrixXd finals(n, replicas);
  Rng seeds = seeded(seed, 2);
  for (int r = 0; r < replicas; ++r) {
    WarmStream stream(problem, scheme, seeds());
    VectorXd h = VectorXd::Zero(n);
    for (long t = 1; t <= steps_per_replica; ++t) {
      const Transition& tr = stream.advance();
      const double beta = 1.0 / std::pow(static_cast<double>(t), 0.7);
      h += beta * (td_error(tr, w) * stream.e - h.dot(tr.x) * tr.x);
    }
    finals.col(r) = h;
  }
  VectorXd mean(n), se(n);
  for (Index i = 0; i < n; ++i) {
    const VectorXd row = finals.row(i).transpose();
    const Estimate est = summarize(std::span<const double>(row.data(), static_cast<size_t>(row.size())));
    mean(i) = est.mean;
    se(i) = est.se;
  }
  CheckResult out{"h fixed point", false, 0.0, n_se, ""};
  out.error = max_abs_z(mean, se, ctx.c_inv_g);
  out.passed = out.error <= n_se;
  out.detail = describe("h", mean, ctx.c_inv_g);
  return out;
}

CheckResult check_correction_matrix(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                    CorrectionWeighting weighting, long steps, std::uint64_t seed, double n_se) {
  const MatrixXd exact = correction_matrix(problem, scheme, weighting);
  const Index n = exact.rows();
  WarmStream stream(problem, scheme, seed);
  BatchMeans batches(n * n, static_cast<size_t>(std::max<long>(1, steps / static_cast<long>(kBatches))));
  for (long t = 0; t < steps; ++t) {
    const Transition& tr = stream.advance();
    const VectorXd diff = next_expected_features(tr) - next_bootstrapped_features(tr, scheme, weighting);
    const MatrixXd outer = stream.e * diff.transpose();
    batches.add(outer.reshaped());
  }
  const VectorXd flat = exact.reshaped();
  CheckResult out{weighting == CorrectionWeighting::Lambda ? "correction matrix (lambda-weighted)"
                                                           : "correction matrix (nu-weighted)",
                  false, 0.0, n_se, ""};
  out.error = max_abs_z(batches.mean(), batches.standard_error(), flat);
  out.passed = out.error <= n_se;
  out.detail = describe("M", batches.mean(), flat);
  return out;
}

CheckResult check_descends_mspbe(const EvaluationProblem& problem, const BootstrapScheme& scheme,
                                 CorrectionWeighting weighting, const VectorXd& w, double tolerance) {
  const MspbeContext ctx = mspbe_context(problem, scheme, w);
  const MatrixXd m = correction_matrix(problem, scheme, weighting);
  const VectorXd update = ctx.g - problem.discount() * (m.transpose() * ctx.c_inv_g);
  const VectorXd descent = -0.5 * mspbe_gradient(problem, scheme, w);
  CheckResult out{weighting == CorrectionWeighting::Lambda ? "expected update is -grad J/2 (lambda-weighted)"
                                                           : "expected update is -grad J/2 (nu-weighted)",
                  false, 0.0, tolerance, ""};
  out.error = (update - descent).cwiseAbs().maxCoeff() / std::max(descent.cwiseAbs().maxCoeff(), 1e-12);
  out.passed = out.error <= tolerance;
  out.detail = describe("update", update, descent);
  return out;
}

std::vector<CheckResult> run_oracle_suite(const OracleOptions& options) {
  std::vector<CheckResult> results;
  auto tag = [&](CheckResult r, const std::string& where) {
    r.name += " [" + where + "]";
    results.push_back(std::move(r));
  };

  results.push_back(check_forward_backward(options.seed));

  const EvaluationProblem two(envs::two_state());
  envs::RandomMdpSpec spec;
  spec.n_states = 5;
  spec.n_actions = 2;
  spec.n_features = 3;
  spec.discount = 0.9;
  spec.seed = options.seed;
  const EvaluationProblem small(envs::random_mdp(spec).task);

  Rng rng = seeded(options.seed, 3);
  for (const EvaluationProblem* problem : {&two, &small}) {
    const std::string where = problem->task().name;
    for (double zeta : {0.25, 0.75}) {
      const BootstrapScheme scheme = BootstrapScheme::abq(zeta, problem->behavior(), problem->target());
      const VectorXd w = random_vector(problem->x().cols(), rng);
      const std::string label = where + ", zeta " + std::to_string(zeta).substr(0, 4);
      tag(check_expected_update(*problem, scheme, w, options.sampled_steps, rng()), label);
      tag(check_gradient(*problem, scheme, 20, rng()), label);
      tag(check_gradient_at_solution(*problem, scheme), label);
    }
  }

  const BootstrapScheme half = BootstrapScheme::abq(0.5, two.behavior(), two.target());
  const VectorXd w = random_vector(1, rng);
  tag(check_h_fixed_point(two, half, w, 50, std::max<long>(1, options.sampled_steps / 50), rng()), "two_state");
  tag(check_correction_matrix(two, half, CorrectionWeighting::Lambda, options.sampled_steps, rng()),
      "two_state");
  tag(check_descends_mspbe(two, half, CorrectionWeighting::Lambda, w), "two_state");
  return results;
}

}  // namespace abq
