#pragma once

#include <memory>
#include <vector>

#include "abq/bootstrap.hpp"
#include "abq/mdp.hpp"

namespace abq {

/// Everything a learner needs to know about one state: both policies'
/// action probabilities and the feature vector of every action (one row per
/// action).
struct ActionSet {
  VectorXd behavior;
  VectorXd target;
  MatrixXd features;

  Index n_actions() const { return features.rows(); }
};

/// Which per-action weight forms the lambda-weighted next feature x-tilde.
/// Lambda uses lambda(s',a) * pi(a|s'), which is what the MSPBE gradient
/// requires; Nu is the literal nu(s',a) * pi(a|s') form of the online update
/// listing.
enum class CorrectionWeighting { Lambda, Nu };

/// One step (S_t, A_t, R_{t+1}, S_{t+1}) sampled under the behavior policy.
struct Transition {
  Index state = -1;       // -1 for continuous-state tasks
  Index action = 0;
  Index next_state = -1;
  VectorXd x;             // x(S_t, A_t)
  double behavior_prob = 1.0;  // mu(A_t|S_t), positive since A_t was sampled
  double target_prob = 1.0;    // pi(A_t|S_t)
  double reward = 0.0;
  double discount = 0.0;
  bool terminal = false;
  std::shared_ptr<const ActionSet> next;  // S_{t+1}; unused when terminal

  double rho() const { return target_prob / behavior_prob; }
};

using Trajectory = std::vector<Transition>;

/// x-bar = sum_a pi(a|s) x(s,a).
VectorXd expected_features(const ActionSet& actions);
/// x-tilde = sum_a w(s,a) pi(a|s) x(s,a) with w = lambda or nu.
VectorXd bootstrapped_features(const ActionSet& actions, const BootstrapScheme& scheme,
                               CorrectionWeighting weighting);

/// x-bar_{t+1}; zero at terminal transitions.
VectorXd next_expected_features(const Transition& tr);
/// x-tilde_{t+1}; zero at terminal transitions.
VectorXd next_bootstrapped_features(const Transition& tr, const BootstrapScheme& scheme,
                                    CorrectionWeighting weighting);

/// delta_t = R + gamma w'x-bar_{t+1} - w'x_t.
double td_error(const Transition& tr, const VectorXd& w);

/// One ActionSet per state of a finite task, shared by every transition that
/// lands there.
std::vector<std::shared_ptr<const ActionSet>> action_sets(const FeatureMap& features,
                                                          const Policy& behavior, const Policy& target);

}  // namespace abq
