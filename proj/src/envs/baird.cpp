#include "abq/envs/baird.hpp"

namespace abq::envs {

FiniteTask baird() {
  constexpr Index S = 7, A = 2, F = 8;
  MatrixXd p = MatrixXd::Zero(S * A, S);
  for (Index s = 0; s < S; ++s) {
    for (Index outer = 0; outer < 6; ++outer) p(pair_index(s, kDashed, A), outer) = 1.0 / 6.0;
    p(pair_index(s, kSolid, A), 6) = 1.0;
  }

  MatrixXd phi = MatrixXd::Zero(S, F);
  for (Index s = 0; s < 6; ++s) {
    phi(s, s) = 2.0;
    phi(s, 7) = 1.0;
  }
  phi(6, 6) = 1.0;
  phi(6, 7) = 2.0;

  MatrixXd x = MatrixXd::Zero(S * A, A * F);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a) x.block(pair_index(s, a, A), a * F, 1, F) = phi.row(s);

  MatrixXd behavior(S, A), target(S, A);
  behavior.col(kDashed).setConstant(6.0 / 7.0);
  behavior.col(kSolid).setConstant(1.0 / 7.0);
  target.col(kDashed).setZero();
  target.col(kSolid).setOnes();

  VectorXd w0 = VectorXd::Ones(A * F);
  w0(6) = 10.0;
  w0(F + 6) = 10.0;

  return FiniteTask{"baird", Mdp(S, A, std::move(p), VectorXd::Zero(S * A), 0.99), Policy(std::move(target)),
                    Policy(std::move(behavior)), FeatureMap(S, A, std::move(x)), std::move(w0)};
}

}  // namespace abq::envs
