#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "abq/mdp.hpp"

namespace abq {

enum class Variant { Abq, AbTrace, ConstantLambda, TreeBackup };

std::string_view to_string(Variant variant);
/// Accepts the config spellings "abq", "abtrace", "constant", "treebackup".
Variant parse_variant(std::string_view name);

/// The two pivotal values of psi: psi0 is where the first cap on nu engages,
/// psi_max is where every cap has engaged.
struct PsiPivots {
  double psi0;
  double psi_max;
};

/// psi0 = 1 / max_{s,a} max(mu, pi) and psi_max = 1 / min_{s,a} max(mu, pi).
/// Throws ModelError when both policies give some action zero probability.
PsiPivots psi_pivots(const Policy& behavior, const Policy& target);

/// Piecewise-linear map [0,1] -> [0, psi_max] sending 0.5 to psi0.
double psi_from_zeta(double zeta, PsiPivots pivots);
/// Inverse of psi_from_zeta on [0, psi_max].
double zeta_from_psi(double psi, PsiPivots pivots);

/// An action-dependent bootstrapping rule. Every variant is expressed through
/// nu(mu, pi), with lambda = nu * mu and trace decay nu * pi (= lambda * rho),
/// so all learners share one trace code path.
///
/// Probabilities of zero follow the 1/0 = inf, 0 * inf = 0 convention.
class BootstrapScheme {
 public:
  /// ABQ with pivots taken from the given policies.
  static BootstrapScheme abq(double zeta, const Policy& behavior, const Policy& target);
  /// ABQ with precomputed pivots, for tasks whose policies are not tables.
  static BootstrapScheme abq(double zeta, PsiPivots pivots);
  /// nu = zeta * min(1/pi, 1/mu); the trace decay becomes zeta * min(1, rho).
  static BootstrapScheme ab_trace(double zeta);
  /// Constant lambda, written as nu = lambda / mu.
  static BootstrapScheme constant_lambda(double lambda);
  /// Constant nu = zeta.
  static BootstrapScheme tree_backup(double zeta);

  Variant variant() const { return variant_; }
  /// zeta for ABQ/AB-Trace/Tree Backup, lambda for the constant variant.
  double parameter() const { return parameter_; }
  /// Cached psi(zeta); only meaningful for ABQ.
  double psi() const { return psi_; }
  std::optional<PsiPivots> pivots() const { return pivots_; }

  double nu(double mu, double pi) const;
  double lambda(double mu, double pi) const;
  /// nu * pi, the factor that multiplies gamma in the trace recursion.
  double trace_factor(double mu, double pi) const;

 private:
  BootstrapScheme(Variant variant, double parameter) : variant_(variant), parameter_(parameter) {}

  Variant variant_;
  double parameter_;
  double psi_ = 0.0;
  std::optional<PsiPivots> pivots_;
};

double nu(const BootstrapScheme& scheme, const Policy& behavior, const Policy& target, Index s, Index a);
double lambda_sa(const BootstrapScheme& scheme, const Policy& behavior, const Policy& target, Index s,
                 Index a);

/// Diagonal of Lambda over pairs in canonical order.
struct BootstrapMatrix {
  VectorXd diag;
};

BootstrapMatrix bootstrap_matrix(const BootstrapScheme& scheme, const Policy& behavior,
                                 const Policy& target);

}  // namespace abq
