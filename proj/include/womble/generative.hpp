#pragma once

// Forward draws from the model's building blocks. Shared by the predictor,
// the simulation harness and the MCMC correctness tests.

#include "womble/car.hpp"
#include "womble/random.hpp"
#include "womble/temporal.hpp"

namespace womble {

/// theta = mean + L_T Z L_S' with Z iid N(0, 1), so that
/// vec(theta) ~ MVN(vec(mean), col_cov (x) row_cov).
Eigen::MatrixXd sample_matrix_normal(const Eigen::Ref<const Eigen::MatrixXd>& mean,
                                     const Eigen::Ref<const Eigen::MatrixXd>& row_cov,
                                     const Eigen::Ref<const Eigen::MatrixXd>& col_cov, Rng& rng);

/// phi ~ MVN(mu 1, tau^2 Q^{-1}) via the Cholesky factor of Q.
Eigen::VectorXd sample_car_field(double mu, double tau, const CarFactor<double>& factor, Rng& rng);

/// Y = max(0, phi) elementwise.
template <typename Derived>
auto tobit_clamp(const Eigen::MatrixBase<Derived>& phi) {
  return phi.array().max(typename Derived::Scalar(0)).matrix();
}

}  // namespace womble
