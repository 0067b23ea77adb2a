#include "abq/envs/random_mdp.hpp"

#include <random>
#include <string>

#include "abq/errors.hpp"

namespace abq::envs {

namespace {

constexpr int kMaxResamples = 100;

MatrixXd simplex_rows(Index rows, Index cols, std::mt19937_64& rng) {
  std::exponential_distribution<double> gamma1(1.0);
  MatrixXd out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = gamma1(rng);
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

FiniteTask draw(const RandomMdpSpec& spec, std::uint64_t sub_seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(sub_seed)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index S = spec.n_states, A = spec.n_actions;

  MatrixXd p(S * A, S);
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < S; ++j) p(i, j) = unit(rng);
    p.row(i) /= p.row(i).sum();
  }
  VectorXd r(S * A);
  for (Index i = 0; i < r.size(); ++i) r(i) = unit(rng);

  MatrixXd x;
  if (spec.tabular) {
    x = MatrixXd::Identity(S * A, S * A);
  } else {
    std::bernoulli_distribution bit(0.5);
    x.resize(S * A, spec.n_features);
    for (Index i = 0; i < x.rows(); ++i)
      for (Index j = 0; j < x.cols(); ++j) x(i, j) = bit(rng) ? 1.0 : 0.0;
  }
  MatrixXd target = simplex_rows(S, A, rng);
  MatrixXd behavior = simplex_rows(S, A, rng);
  const Index n = x.cols();
  return FiniteTask{"random_mdp", Mdp(S, A, std::move(p), std::move(r), spec.discount), Policy(std::move(target)),
                    Policy(std::move(behavior)), FeatureMap(S, A, std::move(x)), VectorXd::Zero(n)};
}

bool full_rank(const FiniteTask& task) {
  const VectorXd d = stationary_distribution(task.mdp, task.behavior).d;
  const MatrixXd& x = task.features.matrix();
  const MatrixXd c = x.transpose() * d.asDiagonal() * x;
  Eigen::FullPivLU<MatrixXd> lu(c);
  lu.setThreshold(1e-10);
  return lu.rank() == c.rows();
}

}  // namespace

RandomMdp random_mdp(const RandomMdpSpec& spec) {
  if (spec.n_states < 1 || spec.n_actions < 1 || (!spec.tabular && spec.n_features < 1))
    throw ModelError("random_mdp: dimensions must be positive");
  for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
    FiniteTask task = draw(spec, static_cast<std::uint64_t>(attempt));
    if (full_rank(task)) return {std::move(task), attempt};
  }
  throw SingularSystemError("random_mdp: no full-rank feature draw in " + std::to_string(kMaxResamples) +
                            " attempts; use fewer features than state-action pairs");
}

}  // namespace abq::envs
