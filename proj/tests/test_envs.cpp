#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Eigenvalues>

#include "abq/envs/baird.hpp"
#include "abq/envs/mountain_car.hpp"
#include "abq/envs/random_mdp.hpp"
#include "abq/envs/two_state.hpp"
#include "abq/errors.hpp"
#include "abq/solvers.hpp"

using namespace abq;
namespace mc = abq::envs::mountain_car;

TEST_CASE("two-state task") {
  const FiniteTask task = envs::two_state();
  CHECK(task.mdp.discount() == 0.9);
  CHECK(task.target(0, envs::kRight) == 0.9);
  CHECK(task.behavior(1, envs::kRight) == 0.1);
  // Ratios at state 2: right 9, left 1/9.
  CHECK(task.target(1, envs::kRight) / task.behavior(1, envs::kRight) == doctest::Approx(9.0));
  CHECK(task.target(1, envs::kLeft) / task.behavior(1, envs::kLeft) == doctest::Approx(1.0 / 9.0));
  CHECK(task.features.matrix()(pair_index(1, envs::kLeft, 2), 0) == 2.0);
  CHECK(task.mdp.reward()(pair_index(1, envs::kRight, 2)) == 1.0);
  CHECK(task.mdp.reward().sum() == 1.0);
  for (Index s = 0; s < 2; ++s) {
    CHECK(task.mdp.transition()(pair_index(s, envs::kLeft, 2), 0) == 1.0);
    CHECK(task.mdp.transition()(pair_index(s, envs::kRight, 2), 1) == 1.0);
  }
  CHECK(task.initial_weights.size() == 1);
}

TEST_CASE("Baird's star") {
  const FiniteTask task = envs::baird();
  const EvaluationProblem pr(task);
  CHECK(task.features.n_features() == 16);
  // Every behavior action lands uniformly on a state: d over states is 1/7.
  const VectorXd& d = pr.behavior_weights();
  for (Index s = 0; s < 7; ++s)
    CHECK(d(pair_index(s, envs::kDashed, 2)) + d(pair_index(s, envs::kSolid, 2)) == doctest::Approx(1.0 / 7.0));
  CHECK(pr.q_pi().cwiseAbs().maxCoeff() == 0.0);
  CHECK(task.initial_weights(6) == 10.0);
  CHECK(task.initial_weights(14) == 10.0);
  CHECK(task.initial_weights.sum() == doctest::Approx(14.0 + 20.0));

  const MatrixXd& x = task.features.matrix();
  const MatrixXd c = x.transpose() * d.asDiagonal() * x;
  Eigen::FullPivLU<MatrixXd> lu(c);
  lu.setThreshold(1e-10);
  CHECK(lu.rank() == 14);

  // The one-step off-policy expected update w += alpha (b - A w) is unstable:
  // A has an eigenvalue with negative real part.
  const SolutionMatrices sol = solution_constant_lambda(pr, 0.0);
  const Eigen::VectorXcd eig = sol.a.eigenvalues();
  double min_real = 1.0;
  for (Index i = 0; i < eig.size(); ++i) min_real = std::min(min_real, eig(i).real());
  CHECK(min_real < -1e-6);
}

TEST_CASE("random MDPs are reproducible and well formed") {
  envs::RandomMdpSpec spec;
  spec.n_states = 10;
  spec.n_actions = 3;
  spec.n_features = 8;
  spec.seed = 42;
  const envs::RandomMdp a = envs::random_mdp(spec), b = envs::random_mdp(spec);
  CHECK(a.task.mdp.transition() == b.task.mdp.transition());
  CHECK(a.task.features.matrix() == b.task.features.matrix());
  CHECK(a.task.behavior.probs() == b.task.behavior.probs());
  spec.seed = 43;
  CHECK(envs::random_mdp(spec).task.mdp.transition() != a.task.mdp.transition());

  const FiniteTask& t = a.task;
  CHECK(t.mdp.discount() == 0.99);
  CHECK((t.mdp.transition().rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(t.mdp.reward().minCoeff() >= 0.0);
  CHECK(t.mdp.reward().maxCoeff() <= 1.0);
  CHECK((t.features.matrix().array() * (t.features.matrix().array() - 1.0)).abs().maxCoeff() == 0.0);
  CHECK((t.target.probs().rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(t.behavior.probs().minCoeff() > 0.0);

  spec.tabular = true;
  const FiniteTask tab = envs::random_mdp(spec).task;
  CHECK(tab.features.matrix() == MatrixXd::Identity(30, 30));

  envs::RandomMdpSpec bad = spec;
  bad.n_states = 0;
  CHECK_THROWS_AS(envs::random_mdp(bad), ModelError);
  // More features than pairs can never give a full-rank C.
  envs::RandomMdpSpec wide;
  wide.n_states = 2;
  wide.n_actions = 2;
  wide.n_features = 6;
  CHECK_THROWS_AS(envs::random_mdp(wide), SingularSystemError);
}

TEST_CASE("random MDPs at the default size have full-rank covariance") {
  envs::RandomMdpSpec spec;
  spec.seed = 7;
  const envs::RandomMdp m = envs::random_mdp(spec);
  CHECK(m.task.mdp.n_states() == 100);
  CHECK(m.task.features.n_features() == 40);
  const EvaluationProblem pr(m.task);
  CHECK_NOTHROW(mspbe(pr, BootstrapScheme::constant_lambda(0.5), VectorXd::Zero(40)));
}

TEST_CASE("mountain car dynamics") {
  // Resting at the valley floor with no throttle stays put.
  const double floor = -std::acos(0.0) / 3.0;
  const mc::StepResult rest = mc::step({floor, 0.0}, 1);
  CHECK(rest.next.velocity == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(rest.reward == -1.0);
  CHECK_FALSE(rest.terminal);

  const mc::StepResult push = mc::step({-0.5, 0.0}, 2);
  CHECK(push.next.velocity == doctest::Approx(0.001 - 0.0025 * std::cos(-1.5)));
  CHECK(push.next.position == doctest::Approx(-0.5 + push.next.velocity));

  // The left wall zeroes the velocity.
  const mc::StepResult wall = mc::step({-1.19, -0.05}, 0);
  CHECK(wall.next.position == mc::kMinPosition);
  CHECK(wall.next.velocity == 0.0);

  // Speed is clipped.
  CHECK(mc::step({-0.5, 0.07}, 2).next.velocity == mc::kMaxSpeed);

  const mc::StepResult goal = mc::step({0.48, 0.05}, 2);
  CHECK(goal.terminal);
  CHECK(goal.next.position == mc::kMaxPosition);

  CHECK_THROWS_AS(mc::step({0.6, 0.0}, 1), ModelError);
  CHECK_THROWS_AS(mc::step({0.0, 0.1}, 1), ModelError);
  CHECK_THROWS_AS(mc::step({0.0, 0.0}, 3), ModelError);

  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const mc::State s = mc::sample_start(rng);
    CHECK(s.position >= -0.6);
    CHECK(s.position <= -0.4);
    CHECK(std::abs(s.velocity) >= 0.005);
    CHECK(std::abs(s.velocity) <= 0.02);
  }
}

TEST_CASE("mountain car policies") {
  const mc::PolicyTables fwd = mc::policies({0.0, 0.01});
  CHECK(fwd.behavior[2] == doctest::Approx(298.0 / 300));
  CHECK(fwd.target[2] == 0.8);
  CHECK(fwd.behavior[0] == doctest::Approx(1.0 / 300));
  const mc::PolicyTables back = mc::policies({0.0, 0.0});
  CHECK(back.behavior[0] == doctest::Approx(298.0 / 300));
  CHECK(back.target[0] == 0.8);
  // The rarely-taken actions carry ratio 30.
  CHECK(fwd.target[0] / fwd.behavior[0] == doctest::Approx(30.0));
  const PsiPivots pv = mc::psi_pivots();
  CHECK(pv.psi0 == doctest::Approx(300.0 / 298.0));
  CHECK(pv.psi_max == doctest::Approx(10.0));
}

TEST_CASE("tile coding") {
  Rng rng(2);
  std::uniform_real_distribution<double> pos(mc::kMinPosition, mc::kMaxPosition);
  std::uniform_real_distribution<double> vel(-mc::kMaxSpeed, mc::kMaxSpeed);
  for (int i = 0; i < 2000; ++i) {
    const mc::State s{pos(rng), vel(rng)};
    for (int a = 0; a < mc::kActions; ++a) {
      const auto idx = mc::active_features(s, a);
      const std::set<int> unique(idx.begin(), idx.end());
      CHECK(unique.size() == static_cast<size_t>(mc::kTilings));
      for (int k : idx) {
        CHECK(k >= a * mc::kFeaturesPerAction);
        CHECK(k < (a + 1) * mc::kFeaturesPerAction);
      }
      const VectorXd x = mc::tile_code(s, a);
      CHECK(x.sum() == 10.0);
      CHECK(x == mc::tile_code(s, a));
    }
  }
  // Corners of the box are coded too.
  CHECK(mc::tile_code({mc::kMinPosition, -mc::kMaxSpeed}, 0).sum() == 10.0);
  CHECK(mc::tile_code({mc::kMaxPosition, mc::kMaxSpeed}, 2).sum() == 10.0);

  const auto set = mc::action_set({-0.5, 0.01});
  CHECK(set->features.rows() == 3);
  CHECK(set->features.cols() == mc::kFeatures);
  CHECK(set->target(2) == 0.8);
}

TEST_CASE("episodes end under either policy") {
  for (bool use_target : {false, true}) {
    Rng rng(use_target ? 3 : 4);
    for (int ep = 0; ep < 20; ++ep) {
      mc::State s = mc::sample_start(rng);
      long t = 0;
      bool done = false;
      while (!done && t < mc::kEpisodeStepCap) {
        const mc::PolicyTables pt = mc::policies(s);
        const auto& probs = use_target ? pt.target : pt.behavior;
        const mc::StepResult r = mc::step(s, static_cast<int>(sample_index(probs.data(), 3, rng)));
        s = r.next;
        done = r.terminal;
        ++t;
      }
      CHECK(done);
    }
  }
}

TEST_CASE("mountain car sampler") {
  mc::Sampler sampler(5);
  long terminals = 0;
  for (int t = 0; t < 50'000; ++t) {
    const Transition tr = sampler.next();
    CHECK(tr.discount == mc::kDiscount);
    CHECK(tr.reward == -1.0);
    CHECK(tr.behavior_prob > 0.0);
    if (tr.terminal) {
      ++terminals;
      CHECK(tr.next == nullptr);
    } else {
      CHECK(tr.next != nullptr);
    }
  }
  CHECK(terminals == sampler.episodes_completed());
  CHECK(terminals > 10);
  CHECK(sampler.truncated_episodes() == 0);
}

TEST_CASE("mountain car ground truth") {
  mc::GroundTruthOptions opt;
  opt.behavior_steps = 20'000;
  opt.n_pairs = 5;
  opt.n_rollouts = 3;
  const mc::GroundTruth a = mc::ground_truth_pairs(9, opt), b = mc::ground_truth_pairs(9, opt);
  CHECK(a.q == b.q);
  CHECK(a.x == b.x);
  CHECK(a.q.size() == 5);
  CHECK(a.x.rows() == 5);
  for (Index i = 0; i < 5; ++i) {
    CHECK(a.q(i) < 0.0);
    CHECK(a.q(i) >= -1000.0);
    CHECK(a.x.row(i).transpose() == mc::tile_code(a.states[static_cast<size_t>(i)], a.actions[static_cast<size_t>(i)]));
  }
}
