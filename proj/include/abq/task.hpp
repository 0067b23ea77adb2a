#pragma once

#include <string>

#include "abq/mdp.hpp"

namespace abq {

/// A finite policy-evaluation problem: the model, both policies, the features
/// and the weights learning starts from.
struct FiniteTask {
  std::string name;
  Mdp mdp;
  Policy target;
  Policy behavior;
  FeatureMap features;
  VectorXd initial_weights;
};

/// Validates that all members agree on dimensions; throws ModelError.
void validate(const FiniteTask& task);

}  // namespace abq
