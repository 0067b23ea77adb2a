#include "abq/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "abq/errors.hpp"

namespace abq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_unit_interval(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0))
    throw ModelError(std::string(what) + " must lie in [0, 1], got " + std::to_string(value));
}

double reciprocal(double x) { return x == 0.0 ? kInf : 1.0 / x; }

// Product with the 0 * inf = 0 convention.
double times(double x, double y) {
  if (x == 0.0 || y == 0.0) return 0.0;
  return x * y;
}

}  // namespace

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::Abq: return "abq";
    case Variant::AbTrace: return "abtrace";
    case Variant::ConstantLambda: return "constant";
    case Variant::TreeBackup: return "treebackup";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  if (name == "abq") return Variant::Abq;
  if (name == "abtrace") return Variant::AbTrace;
  if (name == "constant") return Variant::ConstantLambda;
  if (name == "treebackup") return Variant::TreeBackup;
  throw ModelError("unknown bootstrap variant \"" + std::string(name) + "\"");
}

PsiPivots psi_pivots(const Policy& behavior, const Policy& target) {
  if (behavior.n_states() != target.n_states() || behavior.n_actions() != target.n_actions())
    throw ModelError("psi_pivots: policies have different shapes");
  const MatrixXd larger = behavior.probs().cwiseMax(target.probs());
  const double smallest = larger.minCoeff();
  if (smallest <= 0.0)
    throw ModelError("psi_pivots: some action has zero probability under both policies, psi_max is infinite");
  return {1.0 / larger.maxCoeff(), 1.0 / smallest};
}

double psi_from_zeta(double zeta, PsiPivots pivots) {
  check_unit_interval(zeta, "zeta");
  return 2.0 * zeta * pivots.psi0 + std::max(2.0 * zeta - 1.0, 0.0) * (pivots.psi_max - 2.0 * pivots.psi0);
}

double zeta_from_psi(double psi, PsiPivots pivots) {
  if (!(psi >= 0.0 && psi <= pivots.psi_max))
    throw ModelError("psi must lie in [0, psi_max], got " + std::to_string(psi));
  double zeta = psi / (2.0 * pivots.psi0);
  // When psi0 == psi_max the upper branch is empty and the kink term vanishes.
  if (psi > pivots.psi0)
    zeta += (psi - pivots.psi0) * (2.0 * pivots.psi0 - pivots.psi_max) /
            (2.0 * (pivots.psi_max - pivots.psi0) * pivots.psi0);
  return zeta;
}

BootstrapScheme BootstrapScheme::abq(double zeta, const Policy& behavior, const Policy& target) {
  return abq(zeta, psi_pivots(behavior, target));
}

BootstrapScheme BootstrapScheme::abq(double zeta, PsiPivots pivots) {
  if (!(pivots.psi0 > 0.0 && pivots.psi0 <= pivots.psi_max))
    throw ModelError("ABQ pivots must satisfy 0 < psi0 <= psi_max");
  BootstrapScheme scheme(Variant::Abq, zeta);
  scheme.psi_ = psi_from_zeta(zeta, pivots);
  scheme.pivots_ = pivots;
  return scheme;
}

BootstrapScheme BootstrapScheme::ab_trace(double zeta) {
  check_unit_interval(zeta, "zeta");
  return BootstrapScheme(Variant::AbTrace, zeta);
}

BootstrapScheme BootstrapScheme::constant_lambda(double lambda) {
  check_unit_interval(lambda, "lambda");
  return BootstrapScheme(Variant::ConstantLambda, lambda);
}

BootstrapScheme BootstrapScheme::tree_backup(double zeta) {
  check_unit_interval(zeta, "zeta");
  return BootstrapScheme(Variant::TreeBackup, zeta);
}

double BootstrapScheme::nu(double mu, double pi) const {
  switch (variant_) {
    case Variant::Abq: {
      const double larger = std::max(mu, pi);
      return std::min(psi_, reciprocal(larger));
    }
    case Variant::AbTrace:
      return times(parameter_, std::min(reciprocal(pi), reciprocal(mu)));
    case Variant::ConstantLambda:
      return times(parameter_, reciprocal(mu));
    case Variant::TreeBackup:
      return parameter_;
  }
  return 0.0;
}

// The closed forms below avoid computing (1/m) * m, which can round above one.
double BootstrapScheme::lambda(double mu, double pi) const {
  switch (variant_) {
    case Variant::Abq: {
      const double larger = std::max(mu, pi);
      if (larger == 0.0) return 0.0;
      return std::min(psi_ * mu, mu / larger);
    }
    case Variant::AbTrace:
      if (mu == 0.0) return 0.0;
      return pi == 0.0 ? parameter_ : parameter_ * std::min(1.0, mu / pi);
    case Variant::ConstantLambda:
      return parameter_;
    case Variant::TreeBackup:
      return parameter_ * mu;
  }
  return 0.0;
}

double BootstrapScheme::trace_factor(double mu, double pi) const {
  if (pi == 0.0) return 0.0;
  switch (variant_) {
    case Variant::Abq: {
      const double larger = std::max(mu, pi);
      return std::min(psi_ * pi, pi / larger);
    }
    case Variant::AbTrace:
      return mu == 0.0 ? parameter_ : parameter_ * std::min(1.0, pi / mu);
    case Variant::ConstantLambda:
      return mu == 0.0 ? times(parameter_, kInf) : parameter_ * pi / mu;
    case Variant::TreeBackup:
      return parameter_ * pi;
  }
  return 0.0;
}

double nu(const BootstrapScheme& scheme, const Policy& behavior, const Policy& target, Index s, Index a) {
  return scheme.nu(behavior(s, a), target(s, a));
}

double lambda_sa(const BootstrapScheme& scheme, const Policy& behavior, const Policy& target, Index s,
                 Index a) {
  return scheme.lambda(behavior(s, a), target(s, a));
}

BootstrapMatrix bootstrap_matrix(const BootstrapScheme& scheme, const Policy& behavior,
                                 const Policy& target) {
  if (behavior.n_states() != target.n_states() || behavior.n_actions() != target.n_actions())
    throw ModelError("bootstrap_matrix: policies have different shapes");
  const Index n_actions = behavior.n_actions();
  VectorXd diag(behavior.n_states() * n_actions);
  for (Index s = 0; s < behavior.n_states(); ++s)
    for (Index a = 0; a < n_actions; ++a) {
      const double value = lambda_sa(scheme, behavior, target, s, a);
      if (!(value >= 0.0 && value <= 1.0))
        throw ModelError("bootstrap_matrix: lambda(s,a) outside [0, 1]");
      diag(pair_index(s, a, n_actions)) = value;
    }
  return {std::move(diag)};
}

}  // namespace abq
