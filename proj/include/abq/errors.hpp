#pragma once

#include <stdexcept>
#include <string>

namespace abq {

/// Malformed model input: bad dimensions, probabilities that do not sum to
/// one, out-of-range parameters.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The behavior chain has no unique invariant distribution over the pairs it
/// can visit.
class NotIrreducibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear system the caller needs solved is singular or numerically so.
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by a learner when its weights stop being finite or blow past the
/// divergence bound.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(long step, const std::string& what)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

}  // namespace abq
