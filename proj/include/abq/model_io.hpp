#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "abq/task.hpp"

namespace abq {

// Model documents look like
//
//   {"n_states": 2, "n_actions": 2,
//    "transition": [[[p(0|0,0), p(1|0,0)], ...], ...],   // [s][a][s']
//    "reward_mean": [[r(0,0), r(0,1)], ...],              // [s][a]
//    "discount": 0.9,
//    "policies": {"target": [[...]], "behavior": [[...]]}, // [s][a]
//    "features": [[...], ...]}                             // row s*n_actions+a
//
// "initial_weights" is optional and defaults to zeros.

FiniteTask parse_task(std::string_view json_text, std::string name = "file");
FiniteTask load_task(const std::filesystem::path& path);
std::string dump_task(const FiniteTask& task);

}  // namespace abq
