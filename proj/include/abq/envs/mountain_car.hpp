#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "abq/bootstrap.hpp"
#include "abq/sampling.hpp"
#include "abq/transition.hpp"

namespace abq::envs::mountain_car {

inline constexpr double kMinPosition = -1.2;
inline constexpr double kMaxPosition = 0.5;
inline constexpr double kMaxSpeed = 0.07;
inline constexpr double kDiscount = 0.999;
inline constexpr int kActions = 3;  // reverse, none, forward
inline constexpr int kTilings = 10;
inline constexpr int kTilesPerDim = 4;
inline constexpr int kFeaturesPerAction = 32;
inline constexpr int kFeatures = kActions * kFeaturesPerAction;
inline constexpr long kEpisodeStepCap = 100'000;

struct State {
  double position = 0.0;
  double velocity = 0.0;
};

struct StepResult {
  State next;
  double reward = -1.0;
  bool terminal = false;
};

/// Deterministic dynamics; throws ModelError for states outside the box.
StepResult step(State state, int action);

/// Position uniform on [-0.6, -0.4], speed uniform on [0.005, 0.02] with a
/// random sign.
State sample_start(Rng& rng);

struct PolicyTables {
  std::array<double, kActions> behavior;
  std::array<double, kActions> target;
};

/// Both policies favour forward when vel > 0 and reverse otherwise.
PolicyTables policies(State state);

/// Pivots of the ABQ map for these policy tables: 300/298 and 10.
PsiPivots psi_pivots();

/// Indices of the 10 active features of (state, action), one per tiling.
/// Each tiling's (tiling, tile) key is hashed into the action's 32 slots;
/// collisions within one state probe forward to the next free slot.
std::array<int, kTilings> active_features(State state, int action);

/// 96-vector with ones at active_features(state, action).
VectorXd tile_code(State state, int action);

/// The three actions' features and both policies at a state.
std::shared_ptr<const ActionSet> action_set(State state);

/// Endless stream of behavior transitions; a new episode starts after every
/// terminal transition or after kEpisodeStepCap steps.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed);

  Transition next();
  long episodes_completed() const { return episodes_; }
  long truncated_episodes() const { return truncated_; }
  State state() const { return state_; }

 private:
  Rng rng_;
  State state_;
  std::shared_ptr<const ActionSet> here_;
  long episode_steps_ = 0;
  long episodes_ = 0;
  long truncated_ = 0;
};

struct GroundTruthOptions {
  long behavior_steps = 1'000'000;
  int n_pairs = 30;
  int n_rollouts = 100;
  double discount_floor = 1e-6;  // rollouts stop once gamma^t falls below
};

struct GroundTruth {
  std::vector<State> states;
  std::vector<int> actions;
  MatrixXd x;  // one feature row per pair
  VectorXd q;  // mean target-policy return per pair
  long truncated_rollouts = 0;
};

/// Pairs drawn uniformly from the second half of a behavior run, each valued
/// by averaging target-policy rollouts that start with the pair's action.
GroundTruth ground_truth_pairs(std::uint64_t seed, const GroundTruthOptions& options = {});

}  // namespace abq::envs::mountain_car
