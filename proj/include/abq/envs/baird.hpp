#pragma once

#include "abq/task.hpp"

namespace abq::envs {

/// Baird's seven-state star as an action-value task. Action 0 (dashed) jumps
/// uniformly to one of the six outer states, action 1 (solid) goes to the
/// center state 6. Each action owns an 8-wide feature block holding the
/// classical state features: 2 e_i + e_7 for outer states, e_6 + 2 e_7 for the
/// center. All rewards are zero, so q_pi = 0.
inline constexpr Index kDashed = 0;
inline constexpr Index kSolid = 1;

FiniteTask baird();

}  // namespace abq::envs
