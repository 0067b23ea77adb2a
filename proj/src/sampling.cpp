#include "abq/sampling.hpp"

#include "abq/errors.hpp"

namespace abq {

Index sample_index(const double* probs, Index n, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double cumulative = 0.0;
  Index last_positive = -1;
  for (Index i = 0; i < n; ++i) {
    if (probs[i] <= 0.0) continue;
    cumulative += probs[i];
    last_positive = i;
    if (u < cumulative) return i;
  }
  if (last_positive < 0) throw ModelError("sample_index: no positive probability");
  return last_positive;  // u landed in the rounding gap below 1
}

FiniteSampler::FiniteSampler(const FiniteTask& task, std::uint64_t seed, Index start_state)
    : task_(&task), rng_(seed), state_(start_state) {
  if (start_state < 0 || start_state >= task.mdp.n_states()) throw ModelError("start state out of range");
  build(task);
}

FiniteSampler::FiniteSampler(const FiniteTask& task, std::uint64_t seed, const VectorXd& start_pairs)
    : task_(&task), rng_(seed) {
  const Index n_actions = task.mdp.n_actions();
  if (start_pairs.size() != task.mdp.n_pairs()) throw ModelError("start distribution has the wrong size");
  const VectorXd marginal = start_pairs.reshaped(n_actions, task.mdp.n_states()).colwise().sum().transpose();
  state_ = sample_index(marginal.data(), marginal.size(), rng_);
  build(task);
}

void FiniteSampler::build(const FiniteTask& task) {
  validate(task);
  sets_ = action_sets(task.features, task.behavior, task.target);
}

Transition FiniteSampler::next() {
  const Mdp& mdp = task_->mdp;
  const Index n_actions = mdp.n_actions();
  const ActionSet& here = *sets_[static_cast<size_t>(state_)];

  Transition tr;
  tr.state = state_;
  tr.action = sample_index(here.behavior.data(), n_actions, rng_);
  const Index sa = pair_index(state_, tr.action, n_actions);
  const VectorXd next_probs = mdp.transition().row(sa).transpose();
  tr.next_state = sample_index(next_probs.data(), next_probs.size(), rng_);
  tr.x = here.features.row(tr.action).transpose();
  tr.behavior_prob = here.behavior(tr.action);
  tr.target_prob = here.target(tr.action);
  tr.reward = mdp.reward()(sa);
  tr.discount = mdp.discount();
  tr.next = sets_[static_cast<size_t>(tr.next_state)];
  state_ = tr.next_state;
  return tr;
}

Trajectory FiniteSampler::take(size_t n) {
  Trajectory out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(next());
  return out;
}

}  // namespace abq
