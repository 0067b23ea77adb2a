#pragma once

#include <cstdint>

#include "abq/task.hpp"

namespace abq::envs {

struct RandomMdpSpec {
  Index n_states = 100;
  Index n_actions = 5;
  Index n_features = 40;
  double discount = 0.99;
  std::uint64_t seed = 0;
  bool tabular = false;  // identity features instead of random binary ones
};

struct RandomMdp {
  FiniteTask task;
  int resamples = 0;  // draws rejected for a rank-deficient X'DX
};

/// Transition probabilities and rewards uniform on [0,1) (rows normalized),
/// binary features with P(1) = 1/2, both policies Dirichlet(1,...,1) per
/// state. Rank-deficient draws are redrawn from the next sub-seed.
RandomMdp random_mdp(const RandomMdpSpec& spec);

}  // namespace abq::envs
