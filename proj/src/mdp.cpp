#include "abq/mdp.hpp"

#include <cmath>
#include <string>

#include "abq/errors.hpp"

namespace abq {

namespace {

// Rows must be nonnegative and sum to one within kProbabilityTolerance; rows
// that pass are renormalized exactly.
void normalize_rows(MatrixXd& m, const char* what) {
  for (Index i = 0; i < m.rows(); ++i) {
    if (!m.row(i).allFinite())
      throw ModelError(std::string(what) + ": non-finite entry in row " + std::to_string(i));
    if ((m.row(i).array() < 0.0).any())
      throw ModelError(std::string(what) + ": negative probability in row " + std::to_string(i));
    const double total = m.row(i).sum();
    if (std::abs(total - 1.0) > kProbabilityTolerance)
      throw ModelError(std::string(what) + ": row " + std::to_string(i) + " sums to " +
                       std::to_string(total));
    m.row(i) /= total;
  }
}

constexpr Index kDirectSolveLimit = 2000;
constexpr long kPowerIterationCap = 1'000'000;
constexpr double kPowerIterationTolerance = 1e-12;
constexpr double kStationaryResidual = 1e-10;
// Pairs the behavior selects but that end up with less mass than this are
// treated as transient.
constexpr double kRecurrentMass = 1e-14;

VectorXd stationary_direct(const MatrixXd& p) {
  const Index n = p.rows();
  MatrixXd balance = p.transpose() - MatrixXd::Identity(n, n);
  Eigen::FullPivLU<MatrixXd> lu(balance);
  lu.setThreshold(1e-10);
  if (lu.rank() < n - 1)
    throw NotIrreducibleError("behavior chain has eigenvalue 1 with multiplicity " +
                              std::to_string(n - lu.rank()));
  MatrixXd system(n + 1, n);
  system.topRows(n) = balance;
  system.row(n).setOnes();
  VectorXd rhs = VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  return system.colPivHouseholderQr().solve(rhs);
}

VectorXd stationary_power(const MatrixXd& p) {
  const Index n = p.rows();
  VectorXd d = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  // Lazy chain (I + P) / 2 has the same invariant distribution and no period.
  for (long it = 0; it < kPowerIterationCap; ++it) {
    VectorXd next = 0.5 * (d + p.transpose() * d);
    const double change = (next - d).cwiseAbs().maxCoeff();
    d = std::move(next);
    if (change < kPowerIterationTolerance) return d;
  }
  throw NotIrreducibleError("power iteration did not converge within the iteration cap");
}

}  // namespace

Mdp::Mdp(Index n_states, Index n_actions, MatrixXd transition, VectorXd reward_mean,
         double discount)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward_mean)),
      discount_(discount) {
  if (n_states <= 0 || n_actions <= 0) throw ModelError("Mdp: state and action counts must be positive");
  if (transition_.rows() != n_pairs() || transition_.cols() != n_states)
    throw ModelError("Mdp: transition must be (n_states*n_actions) x n_states");
  if (reward_.size() != n_pairs()) throw ModelError("Mdp: reward_mean must have one entry per pair");
  if (!reward_.allFinite()) throw ModelError("Mdp: non-finite reward");
  if (!(discount >= 0.0 && discount < 1.0)) throw ModelError("Mdp: discount must lie in [0, 1)");
  normalize_rows(transition_, "Mdp transition");
}

Policy::Policy(MatrixXd probs) : probs_(std::move(probs)) {
  if (probs_.rows() == 0 || probs_.cols() == 0) throw ModelError("Policy: empty table");
  normalize_rows(probs_, "Policy");
}

Policy Policy::uniform(Index n_states, Index n_actions) {
  return Policy(MatrixXd::Constant(n_states, n_actions, 1.0 / static_cast<double>(n_actions)));
}

FeatureMap::FeatureMap(Index n_states, Index n_actions, MatrixXd x)
    : n_states_(n_states), n_actions_(n_actions), x_(std::move(x)) {
  if (x_.rows() != n_states * n_actions)
    throw ModelError("FeatureMap: expected one row per state-action pair");
  if (x_.cols() == 0) throw ModelError("FeatureMap: no features");
  if (!x_.allFinite()) throw ModelError("FeatureMap: non-finite feature value");
}

FeatureMap FeatureMap::tabular(Index n_states, Index n_actions) {
  const Index n = n_states * n_actions;
  return FeatureMap(n_states, n_actions, MatrixXd::Identity(n, n));
}

bool FeatureMap::is_tabular() const {
  return x_.rows() == x_.cols() && x_.isIdentity(0.0);
}

void check_compatible(const Mdp& mdp, const Policy& policy) {
  if (policy.n_states() != mdp.n_states() || policy.n_actions() != mdp.n_actions())
    throw ModelError("policy dimensions do not match the MDP");
}

void check_compatible(const Mdp& mdp, const FeatureMap& features) {
  if (features.n_states() != mdp.n_states() || features.n_actions() != mdp.n_actions())
    throw ModelError("feature map dimensions do not match the MDP");
}

MatrixXd target_transition_matrix(const Mdp& mdp, const Policy& policy) {
  check_compatible(mdp, policy);
  const Index n_actions = mdp.n_actions();
  MatrixXd p = MatrixXd::Zero(mdp.n_pairs(), mdp.n_pairs());
  for (Index sa = 0; sa < mdp.n_pairs(); ++sa) {
    for (Index s_next = 0; s_next < mdp.n_states(); ++s_next) {
      const double reach = mdp.transition()(sa, s_next);
      if (reach == 0.0) continue;
      for (Index a_next = 0; a_next < n_actions; ++a_next)
        p(sa, pair_index(s_next, a_next, n_actions)) = reach * policy(s_next, a_next);
    }
  }
  return p;
}

StateActionDist stationary_distribution(const Mdp& mdp, const Policy& behavior) {
  const MatrixXd p = target_transition_matrix(mdp, behavior);
  VectorXd d = p.rows() <= kDirectSolveLimit ? stationary_direct(p) : stationary_power(p);

  for (Index s = 0; s < mdp.n_states(); ++s) {
    for (Index a = 0; a < mdp.n_actions(); ++a) {
      double& mass = d(pair_index(s, a, mdp.n_actions()));
      if (behavior(s, a) == 0.0)
        mass = 0.0;
      else if (std::abs(mass) < 1e-15)
        mass = std::max(mass, 0.0);
      if (behavior(s, a) > 0.0 && mass < kRecurrentMass)
        throw NotIrreducibleError("pair (" + std::to_string(s) + "," + std::to_string(a) +
                                  ") is selected by the behavior policy but is transient");
    }
  }
  if ((d.array() < 0.0).any()) throw NotIrreducibleError("stationary solve produced negative mass");
  d /= d.sum();

  const double residual = (p.transpose() * d - d).cwiseAbs().maxCoeff();
  if (residual > kStationaryResidual)
    throw NotIrreducibleError("stationary residual " + std::to_string(residual) + " above tolerance");
  return {std::move(d)};
}

VectorXd exact_q_pi(const Mdp& mdp, const Policy& target) {
  const MatrixXd p = target_transition_matrix(mdp, target);
  const Index n = p.rows();
  const MatrixXd system = MatrixXd::Identity(n, n) - mdp.discount() * p;
  Eigen::PartialPivLU<MatrixXd> lu(system);
  VectorXd q = lu.solve(mdp.reward());
  const double residual = (system * q - mdp.reward()).cwiseAbs().maxCoeff();
  // gamma < 1 and a stochastic P make the system strictly diagonally dominant.
  if (!q.allFinite() || residual > 1e-10 * (1.0 + q.cwiseAbs().maxCoeff()))
    throw SingularSystemError("Bellman solve residual " + std::to_string(residual));
  return q;
}

}  // namespace abq
