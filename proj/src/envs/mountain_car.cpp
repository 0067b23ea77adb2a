#include "abq/envs/mountain_car.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "abq/errors.hpp"

namespace abq::envs::mountain_car {

namespace {

bool in_box(State s) {
  return s.position >= kMinPosition && s.position <= kMaxPosition && std::abs(s.velocity) <= kMaxSpeed;
}

int tile(double unit, int tiling) {
  const int idx = static_cast<int>(std::floor(unit * kTilesPerDim + static_cast<double>(tiling) / kTilings));
  return std::clamp(idx, 0, kTilesPerDim - 1);
}

int hash_slot(int tiling, int tile_index) {
  const std::uint32_t key = static_cast<std::uint32_t>(tiling * kTilesPerDim * kTilesPerDim + tile_index);
  return static_cast<int>((key * 2654435761u) >> 27);  // top 5 bits
}

int sample_action(const std::array<double, kActions>& probs, Rng& rng) {
  return static_cast<int>(sample_index(probs.data(), kActions, rng));
}

}  // namespace

StepResult step(State state, int action) {
  if (!in_box(state)) throw ModelError("mountain car state out of range");
  if (action < 0 || action >= kActions) throw ModelError("mountain car action out of range");
  StepResult out;
  double vel = state.velocity + 0.001 * (action - 1) - 0.0025 * std::cos(3.0 * state.position);
  vel = std::clamp(vel, -kMaxSpeed, kMaxSpeed);
  double pos = std::clamp(state.position + vel, kMinPosition, kMaxPosition);
  if (pos == kMinPosition && vel < 0.0) vel = 0.0;
  out.next = {pos, vel};
  out.terminal = pos >= kMaxPosition;
  return out;
}

State sample_start(Rng& rng) {
  std::uniform_real_distribution<double> position(-0.6, -0.4);
  std::uniform_real_distribution<double> speed(0.005, 0.02);
  const double p = position(rng);
  const double v = speed(rng);
  return {p, std::bernoulli_distribution(0.5)(rng) ? v : -v};
}

PolicyTables policies(State state) {
  if (state.velocity > 0.0) return {{1.0 / 300, 1.0 / 300, 298.0 / 300}, {0.1, 0.1, 0.8}};
  return {{298.0 / 300, 1.0 / 300, 1.0 / 300}, {0.8, 0.1, 0.1}};
}

PsiPivots psi_pivots() { return {300.0 / 298.0, 10.0}; }

std::array<int, kTilings> active_features(State state, int action) {
  if (!in_box(state)) throw ModelError("tile_code: state out of range");
  if (action < 0 || action >= kActions) throw ModelError("tile_code: action out of range");
  const double u = (state.position - kMinPosition) / (kMaxPosition - kMinPosition);
  const double v = (state.velocity + kMaxSpeed) / (2.0 * kMaxSpeed);
  std::array<bool, kFeaturesPerAction> taken{};
  std::array<int, kTilings> out{};
  for (int t = 0; t < kTilings; ++t) {
    int slot = hash_slot(t, tile(u, t) * kTilesPerDim + tile(v, t));
    while (taken[static_cast<size_t>(slot)]) slot = (slot + 1) % kFeaturesPerAction;
    taken[static_cast<size_t>(slot)] = true;
    out[static_cast<size_t>(t)] = action * kFeaturesPerAction + slot;
  }
  return out;
}

VectorXd tile_code(State state, int action) {
  VectorXd x = VectorXd::Zero(kFeatures);
  for (int i : active_features(state, action)) x(i) = 1.0;
  return x;
}

std::shared_ptr<const ActionSet> action_set(State state) {
  auto set = std::make_shared<ActionSet>();
  const PolicyTables tables = policies(state);
  set->behavior = Eigen::Map<const VectorXd>(tables.behavior.data(), kActions);
  set->target = Eigen::Map<const VectorXd>(tables.target.data(), kActions);
  set->features = MatrixXd::Zero(kActions, kFeatures);
  for (int a = 0; a < kActions; ++a)
    for (int i : active_features(state, a)) set->features(a, i) = 1.0;
  return set;
}

Sampler::Sampler(std::uint64_t seed) : rng_(seed), state_(sample_start(rng_)), here_(action_set(state_)) {}

Transition Sampler::next() {
  Transition tr;
  tr.action = sample_action(policies(state_).behavior, rng_);
  tr.x = here_->features.row(tr.action).transpose();
  tr.behavior_prob = here_->behavior(tr.action);
  tr.target_prob = here_->target(tr.action);
  const StepResult r = step(state_, static_cast<int>(tr.action));
  tr.reward = r.reward;
  tr.discount = kDiscount;
  ++episode_steps_;
  // A capped episode is cut like a terminal one so the trace never spans two
  // episodes.
  const bool capped = !r.terminal && episode_steps_ >= kEpisodeStepCap;
  tr.terminal = r.terminal || capped;

  if (tr.terminal) {
    if (capped) ++truncated_;
    ++episodes_;
    episode_steps_ = 0;
    state_ = sample_start(rng_);
    here_ = action_set(state_);
  } else {
    state_ = r.next;
    here_ = action_set(state_);
    tr.next = here_;
  }
  return tr;
}

GroundTruth ground_truth_pairs(std::uint64_t seed, const GroundTruthOptions& options) {
  if (options.n_pairs < 1 || options.n_rollouts < 1 || options.behavior_steps < 2)
    throw ModelError("ground_truth_pairs: counts must be positive");
  Rng rng(seed);

  // Behavior run; only the second half is kept for pair selection.
  const long half = options.behavior_steps / 2;
  std::vector<State> kept_states;
  std::vector<int> kept_actions;
  kept_states.reserve(static_cast<size_t>(options.behavior_steps - half));
  kept_actions.reserve(kept_states.capacity());
  State s = sample_start(rng);
  for (long t = 0; t < options.behavior_steps; ++t) {
    const int a = sample_action(policies(s).behavior, rng);
    if (t >= half) {
      kept_states.push_back(s);
      kept_actions.push_back(a);
    }
    const StepResult r = step(s, a);
    s = r.terminal ? sample_start(rng) : r.next;
  }

  const long horizon = static_cast<long>(std::ceil(std::log(options.discount_floor) / std::log(kDiscount)));
  GroundTruth out;
  out.x.resize(options.n_pairs, kFeatures);
  out.q.resize(options.n_pairs);
  std::uniform_int_distribution<size_t> pick(0, kept_states.size() - 1);
  for (int i = 0; i < options.n_pairs; ++i) {
    const size_t k = pick(rng);
    const State start = kept_states[k];
    const int first = kept_actions[k];
    out.states.push_back(start);
    out.actions.push_back(first);
    out.x.row(i) = tile_code(start, first).transpose();

    double total = 0.0;
    for (int rollout = 0; rollout < options.n_rollouts; ++rollout) {
      State here = start;
      int a = first;
      double g = 0.0, weight = 1.0;
      bool done = false;
      for (long t = 0; t < horizon; ++t) {
        const StepResult r = step(here, a);
        g += weight * r.reward;
        weight *= kDiscount;
        if (r.terminal) {
          done = true;
          break;
        }
        here = r.next;
        a = sample_action(policies(here).target, rng);
      }
      if (!done) ++out.truncated_rollouts;
      total += g;
    }
    out.q(i) = total / options.n_rollouts;
  }
  return out;
}

}  // namespace abq::envs::mountain_car
