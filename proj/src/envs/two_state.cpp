#include "abq/envs/two_state.hpp"

namespace abq::envs {

FiniteTask two_state() {
  constexpr Index S = 2, A = 2;
  MatrixXd p = MatrixXd::Zero(S * A, S);
  for (Index s = 0; s < S; ++s) {
    p(pair_index(s, kLeft, A), 0) = 1.0;
    p(pair_index(s, kRight, A), 1) = 1.0;
  }
  VectorXd r = VectorXd::Zero(S * A);
  r(pair_index(1, kRight, A)) = 1.0;

  MatrixXd target(S, A);
  target << 0.1, 0.9,
            0.1, 0.9;
  MatrixXd behavior(S, A);
  behavior << 0.1, 0.9,
              0.9, 0.1;
  MatrixXd x(S * A, 1);
  x << 1.0, 1.0, 2.0, 2.0;

  return FiniteTask{"two_state", Mdp(S, A, std::move(p), std::move(r), 0.9), Policy(std::move(target)),
                    Policy(std::move(behavior)), FeatureMap(S, A, std::move(x)), VectorXd::Zero(1)};
}

}  // namespace abq::envs
