#pragma once

#include <Eigen/Dense>

namespace abq {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Tolerance used when validating probability tables at construction.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Canonical state-action enumeration shared by every matrix and vector over
/// pairs in this library.
constexpr Index pair_index(Index state, Index action, Index n_actions) {
  return state * n_actions + action;
}

/// Finite MDP with transition kernel p(s'|s,a), mean rewards r(s,a) and a
/// discount in [0, 1).
///
/// The kernel is stored as a (n_states * n_actions) x n_states matrix whose
/// row pair_index(s, a) is the next-state distribution.
class Mdp {
 public:
  Mdp(Index n_states, Index n_actions, MatrixXd transition, VectorXd reward_mean,
      double discount);

  Index n_states() const { return n_states_; }
  Index n_actions() const { return n_actions_; }
  Index n_pairs() const { return n_states_ * n_actions_; }
  double discount() const { return discount_; }

  const MatrixXd& transition() const { return transition_; }
  double transition(Index s, Index a, Index s_next) const {
    return transition_(pair_index(s, a, n_actions_), s_next);
  }

  const VectorXd& reward() const { return reward_; }
  double reward(Index s, Index a) const { return reward_(pair_index(s, a, n_actions_)); }

 private:
  Index n_states_;
  Index n_actions_;
  MatrixXd transition_;
  VectorXd reward_;
  double discount_;
};

/// Stationary randomized policy, one row of action probabilities per state.
class Policy {
 public:
  explicit Policy(MatrixXd probs);

  static Policy uniform(Index n_states, Index n_actions);

  Index n_states() const { return probs_.rows(); }
  Index n_actions() const { return probs_.cols(); }
  double operator()(Index s, Index a) const { return probs_(s, a); }
  const MatrixXd& probs() const { return probs_; }

 private:
  MatrixXd probs_;
};

/// Feature matrix X whose row pair_index(s, a) is x(s,a).
class FeatureMap {
 public:
  FeatureMap(Index n_states, Index n_actions, MatrixXd x);

  static FeatureMap tabular(Index n_states, Index n_actions);

  Index n_states() const { return n_states_; }
  Index n_actions() const { return n_actions_; }
  Index n_features() const { return x_.cols(); }
  const MatrixXd& matrix() const { return x_; }
  auto row(Index s, Index a) const { return x_.row(pair_index(s, a, n_actions_)); }

  /// True when X is the identity, i.e. a lookup-table representation.
  bool is_tabular() const;

 private:
  Index n_states_;
  Index n_actions_;
  MatrixXd x_;
};

/// Distribution over state-action pairs in canonical order.
struct StateActionDist {
  VectorXd d;
};

/// Throws ModelError unless the policy is shaped for the MDP.
void check_compatible(const Mdp& mdp, const Policy& policy);
void check_compatible(const Mdp& mdp, const FeatureMap& features);

/// [P]_{sa,s'a'} = p(s'|s,a) * policy(a'|s').
MatrixXd target_transition_matrix(const Mdp& mdp, const Policy& policy);

/// Invariant distribution of the state-action chain induced by the behavior
/// policy. Pairs the behavior never selects get zero mass; every other pair
/// must be recurrent, otherwise NotIrreducibleError is thrown.
StateActionDist stationary_distribution(const Mdp& mdp, const Policy& behavior);

/// q_pi = (I - gamma P_pi)^{-1} r.
VectorXd exact_q_pi(const Mdp& mdp, const Policy& target);

}  // namespace abq
