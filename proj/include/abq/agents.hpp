#pragma once

#include <string_view>
#include <vector>

#include "abq/bootstrap.hpp"
#include "abq/transition.hpp"

namespace abq {

/// Step-size schedule scale / t^exponent, t = 1, 2, ...; exponent 0 gives a
/// constant step size.
struct Schedule {
  double scale = 0.0;
  double exponent = 0.0;

  static Schedule constant(double value) { return {value, 0.0}; }
  double at(long t) const;
};

/// Weights are declared diverged past this infinity-norm.
inline constexpr double kDivergenceBound = 1e12;

/// Learner weights, correction weights and eligibility trace.
struct LearnerState {
  VectorXd w;
  VectorXd h;
  VectorXd e;
  Schedule alpha;
  Schedule beta;
  long steps = 0;

  static LearnerState initial(const VectorXd& w0, Schedule alpha, Schedule beta);
};

/// ABQ(zeta): gradient-corrected update with trace decay gamma * nu * pi.
/// Throws DivergenceError when weights stop being finite or exceed the bound.
void abq_step(LearnerState& state, const Transition& tr, const BootstrapScheme& scheme,
              CorrectionWeighting weighting = CorrectionWeighting::Lambda);

/// AB-Trace(zeta): the same update with the truncated-ratio nu.
void abtrace_step(LearnerState& state, const Transition& tr, const BootstrapScheme& scheme,
                  CorrectionWeighting weighting = CorrectionWeighting::Lambda);

/// Tabular Tree Backup: no correction term, trace decay gamma * zeta * pi.
void tree_backup_step(LearnerState& state, const Transition& tr, const BootstrapScheme& scheme);

/// GQ(lambda): trace decay gamma * lambda * rho and x-tilde = lambda * x-bar.
void gq_step(LearnerState& state, const Transition& tr, double lambda);

enum class AgentKind { Abq, AbTrace, Gq, TreeBackup };

std::string_view to_string(AgentKind kind);
/// Accepts "abq", "abtrace", "gq", "treebackup".
AgentKind parse_agent(std::string_view name);

/// Bundles an agent kind with its bootstrapping scheme so harness code can
/// drive any learner through one call.
class Learner {
 public:
  Learner(AgentKind kind, BootstrapScheme scheme, LearnerState state,
          CorrectionWeighting weighting = CorrectionWeighting::Lambda);

  void observe(const Transition& tr);

  AgentKind kind() const { return kind_; }
  const BootstrapScheme& scheme() const { return scheme_; }
  const LearnerState& state() const { return state_; }
  const VectorXd& weights() const { return state_.w; }

 private:
  AgentKind kind_;
  BootstrapScheme scheme_;
  LearnerState state_;
  CorrectionWeighting weighting_;
};

/// Per-step off-line forward-view deltas alpha (H_t - w'x_t) x_t with w frozen
/// and returns running to the end of the trajectory (or its episode).
std::vector<VectorXd> offline_forward_deltas(const Trajectory& trajectory, const BootstrapScheme& scheme,
                                             const VectorXd& w, double alpha);

/// Per-step backward-view deltas alpha delta_t e_t with the accumulating trace
/// e_t = gamma nu_t pi_t e_{t-1} + x_t.
std::vector<VectorXd> offline_backward_deltas(const Trajectory& trajectory, const BootstrapScheme& scheme,
                                              const VectorXd& w, double alpha);

}  // namespace abq
