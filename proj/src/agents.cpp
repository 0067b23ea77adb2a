#include "abq/agents.hpp"

#include <cmath>
#include <string>

#include "abq/errors.hpp"
#include "abq/solvers.hpp"

namespace abq {

namespace {

void check_sampled(const Transition& tr) {
  if (!(tr.behavior_prob > 0.0))
    throw ModelError("transition action has zero behavior probability");
}

void check_finite(const LearnerState& state) {
  if (!state.w.allFinite() || !state.h.allFinite() || !state.e.allFinite())
    throw DivergenceError(state.steps, "non-finite learner state");
  if (state.w.cwiseAbs().maxCoeff() > kDivergenceBound)
    throw DivergenceError(state.steps, "weights exceeded the divergence bound");
}

// Shared by every learner: the trace decay gamma * nu * pi and x-tilde are the
// only places the bootstrapping scheme enters.
void corrected_step(LearnerState& state, const Transition& tr, const BootstrapScheme& scheme,
                    CorrectionWeighting weighting, bool gradient_correction) {
  check_sampled(tr);
  ++state.steps;
  const double alpha = state.alpha.at(state.steps);

  const double decay = tr.discount * scheme.trace_factor(tr.behavior_prob, tr.target_prob);
  state.e = decay * state.e + tr.x;

  const VectorXd x_bar = next_expected_features(tr);
  const double delta = tr.reward + tr.discount * state.w.dot(x_bar) - state.w.dot(tr.x);

  if (gradient_correction) {
    const double beta = state.beta.at(state.steps);
    const VectorXd x_tilde = next_bootstrapped_features(tr, scheme, weighting);
    const double trace_dot_h = state.e.dot(state.h);
    const double h_dot_x = state.h.dot(tr.x);
    state.w += alpha * (delta * state.e - (tr.discount * trace_dot_h) * (x_bar - x_tilde));
    state.h += beta * (delta * state.e - h_dot_x * tr.x);
  } else {
    state.w += (alpha * delta) * state.e;
  }

  check_finite(state);
  if (tr.terminal) state.e.setZero();
}

bool is_one_hot(const VectorXd& x) {
  Index ones = 0;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) == 1.0)
      ++ones;
    else if (x(i) != 0.0)
      return false;
  }
  return ones == 1;
}

}  // namespace

double Schedule::at(long t) const {
  if (exponent == 0.0) return scale;
  return scale / std::pow(static_cast<double>(std::max(t, 1L)), exponent);
}

LearnerState LearnerState::initial(const VectorXd& w0, Schedule alpha, Schedule beta) {
  if (!(alpha.scale > 0.0)) throw ModelError("alpha must be positive");
  if (!(beta.scale >= 0.0)) throw ModelError("beta must be nonnegative");
  const Index n = w0.size();
  return {w0, VectorXd::Zero(n), VectorXd::Zero(n), alpha, beta, 0};
}

void abq_step(LearnerState& state, const Transition& tr, const BootstrapScheme& scheme,
              CorrectionWeighting weighting) {
  if (scheme.variant() != Variant::Abq) throw ModelError("abq_step needs an ABQ scheme");
  corrected_step(state, tr, scheme, weighting, true);
}

void abtrace_step(LearnerState& state, const Transition& tr, const BootstrapScheme& scheme,
                  CorrectionWeighting weighting) {
  if (scheme.variant() != Variant::AbTrace) throw ModelError("abtrace_step needs an AB-Trace scheme");
  corrected_step(state, tr, scheme, weighting, true);
}

void tree_backup_step(LearnerState& state, const Transition& tr, const BootstrapScheme& scheme) {
  if (scheme.variant() != Variant::TreeBackup)
    throw ModelError("tree_backup_step needs a Tree Backup scheme");
  bool tabular = is_one_hot(tr.x);
  if (tabular && !tr.terminal)
    for (Index a = 0; a < tr.next->n_actions(); ++a) tabular = tabular && is_one_hot(tr.next->features.row(a));
  if (!tabular)
    throw ModelError("Tree Backup requires tabular (standard basis) features");
  corrected_step(state, tr, scheme, CorrectionWeighting::Lambda, false);
}

void gq_step(LearnerState& state, const Transition& tr, double lambda) {
  corrected_step(state, tr, BootstrapScheme::constant_lambda(lambda), CorrectionWeighting::Lambda, true);
}

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Abq: return "abq";
    case AgentKind::AbTrace: return "abtrace";
    case AgentKind::Gq: return "gq";
    case AgentKind::TreeBackup: return "treebackup";
  }
  return "unknown";
}

AgentKind parse_agent(std::string_view name) {
  if (name == "abq") return AgentKind::Abq;
  if (name == "abtrace") return AgentKind::AbTrace;
  if (name == "gq") return AgentKind::Gq;
  if (name == "treebackup") return AgentKind::TreeBackup;
  throw ModelError("unknown agent \"" + std::string(name) + "\"");
}

Learner::Learner(AgentKind kind, BootstrapScheme scheme, LearnerState state, CorrectionWeighting weighting)
    : kind_(kind), scheme_(std::move(scheme)), state_(std::move(state)), weighting_(weighting) {
  const Variant expected = [&] {
    switch (kind) {
      case AgentKind::Abq: return Variant::Abq;
      case AgentKind::AbTrace: return Variant::AbTrace;
      case AgentKind::Gq: return Variant::ConstantLambda;
      case AgentKind::TreeBackup: return Variant::TreeBackup;
    }
    return Variant::Abq;
  }();
  if (scheme_.variant() != expected)
    throw ModelError("agent " + std::string(to_string(kind)) + " cannot use a " +
                     std::string(to_string(scheme_.variant())) + " scheme");
}

void Learner::observe(const Transition& tr) {
  switch (kind_) {
    case AgentKind::Abq: abq_step(state_, tr, scheme_, weighting_); break;
    case AgentKind::AbTrace: abtrace_step(state_, tr, scheme_, weighting_); break;
    case AgentKind::Gq: gq_step(state_, tr, scheme_.parameter()); break;
    case AgentKind::TreeBackup: tree_backup_step(state_, tr, scheme_); break;
  }
}

std::vector<VectorXd> offline_forward_deltas(const Trajectory& trajectory, const BootstrapScheme& scheme,
                                             const VectorXd& w, double alpha) {
  std::vector<VectorXd> deltas;
  deltas.reserve(trajectory.size());
  for (size_t t = 0; t < trajectory.size(); ++t) {
    const size_t horizon = trajectory.size() - 1 - t;
    const double target = truncated_return(trajectory, scheme, w, t, horizon);
    deltas.push_back(alpha * (target - w.dot(trajectory[t].x)) * trajectory[t].x);
  }
  return deltas;
}

std::vector<VectorXd> offline_backward_deltas(const Trajectory& trajectory, const BootstrapScheme& scheme,
                                              const VectorXd& w, double alpha) {
  std::vector<VectorXd> deltas;
  deltas.reserve(trajectory.size());
  VectorXd e = VectorXd::Zero(w.size());
  for (const Transition& tr : trajectory) {
    e = tr.discount * scheme.trace_factor(tr.behavior_prob, tr.target_prob) * e + tr.x;
    deltas.push_back(alpha * td_error(tr, w) * e);
    if (tr.terminal) e.setZero();
  }
  return deltas;
}

}  // namespace abq
