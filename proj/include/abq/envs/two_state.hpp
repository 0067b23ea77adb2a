#pragma once

#include "abq/task.hpp"

namespace abq::envs {

/// Two states, actions left (0) and right (1). Every action moves to the
/// state it points at; taking right in the right state pays 1. State 0 has
/// feature 1 and state 1 has feature 2 for both actions.
inline constexpr Index kLeft = 0;
inline constexpr Index kRight = 1;

FiniteTask two_state();

}  // namespace abq::envs
