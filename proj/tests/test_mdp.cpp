#include <doctest.h>

#include <cmath>
#include <random>

#include "abq/envs/random_mdp.hpp"
#include "abq/envs/two_state.hpp"
#include "abq/errors.hpp"
#include "abq/mdp.hpp"
#include "abq/model_io.hpp"
#include "abq/sampling.hpp"
#include "abq/stats.hpp"

using namespace abq;

namespace {

FiniteTask small_random(std::uint64_t seed, Index states = 4, Index actions = 3) {
  envs::RandomMdpSpec spec;
  spec.n_states = states;
  spec.n_actions = actions;
  spec.n_features = 3;
  spec.discount = 0.9;
  spec.seed = seed;
  return envs::random_mdp(spec).task;
}

}  // namespace

TEST_CASE("mdp construction validates probabilities and discount") {
  MatrixXd p(2, 2);
  p << 0.5, 0.5,
       0.3, 0.7;
  CHECK_NOTHROW(Mdp(2, 1, p, VectorXd::Zero(2), 0.9));
  CHECK_THROWS_AS(Mdp(2, 1, p, VectorXd::Zero(2), 1.0), ModelError);
  CHECK_THROWS_AS(Mdp(2, 1, p, VectorXd::Zero(2), -0.1), ModelError);
  CHECK_THROWS_AS(Mdp(2, 1, p, VectorXd::Zero(3), 0.9), ModelError);
  CHECK_THROWS_AS(Mdp(1, 2, p, VectorXd::Zero(2), 0.9), ModelError);

  MatrixXd off = p;
  off(0, 0) += 1e-9;
  CHECK_THROWS_AS(Mdp(2, 1, off, VectorXd::Zero(2), 0.9), ModelError);

  MatrixXd close = p;
  close(0, 0) += 5e-13;
  Mdp m(2, 1, close, VectorXd::Zero(2), 0.9);
  CHECK(m.transition().row(0).sum() == doctest::Approx(1.0).epsilon(1e-15));

  MatrixXd negative = p;
  negative(1, 0) = -0.3;
  negative(1, 1) = 1.3;
  CHECK_THROWS_AS(Mdp(2, 1, negative, VectorXd::Zero(2), 0.9), ModelError);
}

TEST_CASE("policy rows must be distributions") {
  MatrixXd bad(1, 2);
  bad << 0.6, 0.6;
  CHECK_THROWS_AS(Policy{bad}, ModelError);
  const Policy u = Policy::uniform(3, 4);
  CHECK(u(2, 3) == doctest::Approx(0.25));
}

TEST_CASE("target transition matrix of the two-state task") {
  const FiniteTask task = envs::two_state();
  const MatrixXd p = target_transition_matrix(task.mdp, task.target);
  REQUIRE(p.rows() == 4);
  // (state 0, right) moves to state 1; the target then picks left 0.1, right 0.9.
  const Index row = pair_index(0, envs::kRight, 2);
  CHECK(p(row, pair_index(1, envs::kLeft, 2)) == doctest::Approx(0.1));
  CHECK(p(row, pair_index(1, envs::kRight, 2)) == doctest::Approx(0.9));
  CHECK(p(row, pair_index(0, envs::kLeft, 2)) == 0.0);
  CHECK(p(row, pair_index(0, envs::kRight, 2)) == 0.0);
}

TEST_CASE("target transition matrix trivial and random cases") {
  Mdp one(1, 1, MatrixXd::Ones(1, 1), VectorXd::Ones(1), 0.5);
  CHECK(target_transition_matrix(one, Policy::uniform(1, 1)).isApprox(MatrixXd::Ones(1, 1)));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FiniteTask t = small_random(seed, 3, 2);
    const MatrixXd p = target_transition_matrix(t.mdp, t.target);
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK((p.array() >= 0.0).all());
  }
  CHECK_THROWS_AS(target_transition_matrix(one, Policy::uniform(2, 1)), ModelError);
}

TEST_CASE("stationary distribution of a deterministic swap is uniform") {
  MatrixXd p(2, 2);
  p << 0, 1,
       1, 0;
  Mdp swap(2, 1, p, VectorXd::Zero(2), 0.5);
  const VectorXd d = stationary_distribution(swap, Policy::uniform(2, 1)).d;
  CHECK(d(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d(1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("stationary distribution of the two-state task") {
  // The state chain moves to the other state with probability 0.9 from either
  // side, so both states have mass 1/2 and d(s,a) = mu(a|s) / 2.
  const FiniteTask task = envs::two_state();
  const VectorXd d = stationary_distribution(task.mdp, task.behavior).d;
  for (Index s = 0; s < 2; ++s)
    for (Index a = 0; a < 2; ++a)
      CHECK(d(pair_index(s, a, 2)) == doctest::Approx(0.5 * task.behavior(s, a)).epsilon(1e-12));
}

TEST_CASE("stationary residual and normalization on random chains") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FiniteTask t = small_random(seed + 50);
    const VectorXd d = stationary_distribution(t.mdp, t.behavior).d;
    const MatrixXd p = target_transition_matrix(t.mdp, t.behavior);
    CHECK((p.transpose() * d - d).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(d.sum() - 1.0) <= 1e-10);
    CHECK((d.array() >= 0.0).all());
  }
}

TEST_CASE("stationary distribution by power iteration for large chains") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  MatrixXd p(2002, 1001);
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) p(i, j) = unit(rng);
    p.row(i) /= p.row(i).sum();
  }
  Mdp big(1001, 2, std::move(p), VectorXd::Zero(2002), 0.9);
  const Policy mu = Policy::uniform(1001, 2);
  const VectorXd d = stationary_distribution(big, mu).d;
  const MatrixXd pm = target_transition_matrix(big, mu);
  CHECK((pm.transpose() * d - d).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("reducible behavior chains are rejected") {
  // Two absorbing states: eigenvalue 1 has multiplicity 2.
  Mdp absorbing(2, 1, MatrixXd::Identity(2, 2), VectorXd::Zero(2), 0.5);
  CHECK_THROWS_AS(stationary_distribution(absorbing, Policy::uniform(2, 1)), NotIrreducibleError);

  // State 0 is left forever; its pairs are transient.
  MatrixXd p(2, 2);
  p << 0, 1,
       0, 1;
  Mdp leak(2, 1, p, VectorXd::Zero(2), 0.5);
  CHECK_THROWS_AS(stationary_distribution(leak, Policy::uniform(2, 1)), NotIrreducibleError);
}

TEST_CASE("pairs the behavior never selects get zero mass") {
  MatrixXd p(4, 2);
  p << 0, 1,
       1, 0,
       1, 0,
       0, 1;
  Mdp m(2, 2, p, VectorXd::Zero(4), 0.9);
  MatrixXd mu(2, 2);
  mu << 1, 0,
        1, 0;
  const VectorXd d = stationary_distribution(m, Policy(mu)).d;
  CHECK(d(1) == 0.0);
  CHECK(d(3) == 0.0);
  CHECK(d(0) == doctest::Approx(0.5));
}

TEST_CASE("exact q_pi closed forms") {
  Mdp one(1, 1, MatrixXd::Ones(1, 1), VectorXd::Ones(1), 0.9);
  CHECK(exact_q_pi(one, Policy::uniform(1, 1))(0) == doctest::Approx(10.0).epsilon(1e-12));

  FiniteTask t = small_random(7);
  Mdp zero(t.mdp.n_states(), t.mdp.n_actions(), t.mdp.transition(), VectorXd::Zero(t.mdp.n_pairs()), 0.9);
  CHECK(exact_q_pi(zero, t.target).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact q_pi satisfies the Bellman equation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const FiniteTask t = small_random(seed + 100);
    const VectorXd q = exact_q_pi(t.mdp, t.target);
    const MatrixXd p = target_transition_matrix(t.mdp, t.target);
    CHECK((t.mdp.reward() + t.mdp.discount() * p * q - q).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("exact q_pi agrees with Monte Carlo rollouts") {
  // Plain rollouts under the target policy, truncated where gamma^t < 1e-10.
  auto check_task = [](const FiniteTask& task, std::uint64_t seed) {
    const VectorXd q = exact_q_pi(task.mdp, task.target);
    Rng rng(seed);
    const Index A = task.mdp.n_actions();
    const int horizon = static_cast<int>(std::ceil(std::log(1e-10) / std::log(task.mdp.discount())));
    for (Index s = 0; s < task.mdp.n_states(); ++s)
      for (Index a = 0; a < A; ++a) {
        std::vector<double> returns;
        for (int n = 0; n < 4000; ++n) {
          Index state = s, action = a;
          double g = 0.0, weight = 1.0;
          for (int t = 0; t < horizon; ++t) {
            g += weight * task.mdp.reward(state, action);
            weight *= task.mdp.discount();
            const VectorXd next = task.mdp.transition().row(pair_index(state, action, A)).transpose();
            state = sample_index(next.data(), next.size(), rng);
            const VectorXd probs = task.target.probs().row(state).transpose();
            action = sample_index(probs.data(), A, rng);
          }
          returns.push_back(g);
        }
        const Estimate est = summarize(returns);
        CHECK(std::abs(est.mean - q(pair_index(s, a, A))) <= 3.0 * est.se + 1e-12);
      }
  };
  check_task(envs::two_state(), 11);
  check_task(small_random(5, 3, 2), 12);
}

TEST_CASE("model documents round-trip") {
  const FiniteTask original = envs::two_state();
  const FiniteTask copy = parse_task(dump_task(original), "copy");
  CHECK(copy.mdp.transition() == original.mdp.transition());
  CHECK(copy.mdp.reward() == original.mdp.reward());
  CHECK(copy.mdp.discount() == original.mdp.discount());
  CHECK(copy.target.probs() == original.target.probs());
  CHECK(copy.behavior.probs() == original.behavior.probs());
  CHECK(copy.features.matrix() == original.features.matrix());
}

TEST_CASE("model documents follow the documented nesting") {
  const char* doc = R"({
    "n_states": 2, "n_actions": 2,
    "transition": [[[1, 0], [0, 1]], [[1, 0], [0, 1]]],
    "reward_mean": [[0, 0], [0, 1]],
    "discount": 0.9,
    "policies": {"target": [[0.1, 0.9], [0.1, 0.9]], "behavior": [[0.1, 0.9], [0.9, 0.1]]},
    "features": [[1], [1], [2], [2]]
  })";
  const FiniteTask t = parse_task(doc);
  const FiniteTask ref = envs::two_state();
  CHECK(t.mdp.transition() == ref.mdp.transition());
  CHECK(t.mdp.reward() == ref.mdp.reward());
  CHECK(t.features.matrix() == ref.features.matrix());
  CHECK(t.initial_weights.size() == 1);
}

TEST_CASE("malformed model documents are rejected") {
  CHECK_THROWS_AS(parse_task("{"), ModelError);
  CHECK_THROWS_AS(parse_task(R"({"n_states": 1})"), ModelError);
  const char* bad_row = R"({
    "n_states": 1, "n_actions": 1, "transition": [[[0.9]]], "reward_mean": [[0]], "discount": 0.5,
    "policies": {"target": [[1]], "behavior": [[1]]}, "features": [[1]]})";
  CHECK_THROWS_AS(parse_task(bad_row), ModelError);
  const char* bad_shape = R"({
    "n_states": 1, "n_actions": 1, "transition": [[[1]]], "reward_mean": [[0, 1]], "discount": 0.5,
    "policies": {"target": [[1]], "behavior": [[1]]}, "features": [[1]]})";
  CHECK_THROWS_AS(parse_task(bad_shape), ModelError);
  const char* bad_type = R"({
    "n_states": 1, "n_actions": 1, "transition": [[["x"]]], "reward_mean": [[0]], "discount": 0.5,
    "policies": {"target": [[1]], "behavior": [[1]]}, "features": [[1]]})";
  CHECK_THROWS_AS(parse_task(bad_type), ModelError);
}
