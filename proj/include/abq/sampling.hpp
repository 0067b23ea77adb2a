#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "abq/task.hpp"
#include "abq/transition.hpp"

namespace abq {

using Rng = std::mt19937_64;

/// Draws an index from a probability vector by inverting its running sum.
/// Zero-probability entries are never returned.
Index sample_index(const double* probs, Index n, Rng& rng);

/// Streams behavior-policy transitions from a finite task. The chain never
/// terminates; rewards are the deterministic means r(s,a).
class FiniteSampler {
 public:
  /// Starts from state start_state.
  FiniteSampler(const FiniteTask& task, std::uint64_t seed, Index start_state = 0);
  /// Starts from the state marginal of a state-action distribution, e.g. d_mu,
  /// so the stream is stationary from the first step.
  FiniteSampler(const FiniteTask& task, std::uint64_t seed, const VectorXd& start_pairs);

  Transition next();
  Trajectory take(size_t n);

  Index state() const { return state_; }
  Rng& rng() { return rng_; }

 private:
  void build(const FiniteTask& task);

  const FiniteTask* task_;
  Rng rng_;
  Index state_ = 0;
  std::vector<std::shared_ptr<const ActionSet>> sets_;
};

}  // namespace abq
