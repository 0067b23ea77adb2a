#include "abq/transition.hpp"

#include "abq/errors.hpp"

namespace abq {

VectorXd expected_features(const ActionSet& actions) {
  return actions.features.transpose() * actions.target;
}

VectorXd bootstrapped_features(const ActionSet& actions, const BootstrapScheme& scheme,
                               CorrectionWeighting weighting) {
  VectorXd out = VectorXd::Zero(actions.features.cols());
  for (Index a = 0; a < actions.n_actions(); ++a) {
    const double pi = actions.target(a);
    if (pi == 0.0) continue;
    const double mu = actions.behavior(a);
    const double weight =
        weighting == CorrectionWeighting::Lambda ? scheme.lambda(mu, pi) : scheme.nu(mu, pi);
    out += (weight * pi) * actions.features.row(a).transpose();
  }
  return out;
}

VectorXd next_expected_features(const Transition& tr) {
  if (tr.terminal) return VectorXd::Zero(tr.x.size());
  return expected_features(*tr.next);
}

VectorXd next_bootstrapped_features(const Transition& tr, const BootstrapScheme& scheme,
                                    CorrectionWeighting weighting) {
  if (tr.terminal) return VectorXd::Zero(tr.x.size());
  return bootstrapped_features(*tr.next, scheme, weighting);
}

double td_error(const Transition& tr, const VectorXd& w) {
  double bootstrap = 0.0;
  if (!tr.terminal) bootstrap = tr.discount * w.dot(expected_features(*tr.next));
  return tr.reward + bootstrap - w.dot(tr.x);
}

std::vector<std::shared_ptr<const ActionSet>> action_sets(const FeatureMap& features,
                                                          const Policy& behavior, const Policy& target) {
  if (behavior.n_states() != features.n_states() || target.n_states() != features.n_states() ||
      behavior.n_actions() != features.n_actions() || target.n_actions() != features.n_actions())
    throw ModelError("action_sets: policies and features disagree on shape");
  const Index n_actions = features.n_actions();
  std::vector<std::shared_ptr<const ActionSet>> sets;
  sets.reserve(static_cast<size_t>(features.n_states()));
  for (Index s = 0; s < features.n_states(); ++s) {
    auto set = std::make_shared<ActionSet>();
    set->behavior = behavior.probs().row(s).transpose();
    set->target = target.probs().row(s).transpose();
    set->features = features.matrix().middleRows(s * n_actions, n_actions);
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace abq
