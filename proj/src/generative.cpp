#include "womble/generative.hpp"

namespace womble {

Eigen::MatrixXd sample_matrix_normal(const Eigen::Ref<const Eigen::MatrixXd>& mean,
                                     const Eigen::Ref<const Eigen::MatrixXd>& row_cov,
                                     const Eigen::Ref<const Eigen::MatrixXd>& col_cov, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> lt(row_cov);
  Eigen::LLT<Eigen::MatrixXd> ls(col_cov);
  if (lt.info() != Eigen::Success) throw std::runtime_error("row covariance is not positive definite");
  if (ls.info() != Eigen::Success) throw std::runtime_error("column covariance is not positive definite");
  Eigen::MatrixXd z(mean.rows(), mean.cols());
  for (Index c = 0; c < z.cols(); ++c) z.col(c) = std_normal_vector(z.rows(), rng);
  const Eigen::MatrixXd ls_mat = ls.matrixL();
  return mean + Eigen::MatrixXd(lt.matrixL()) * z * ls_mat.transpose();
}

Eigen::VectorXd sample_car_field(double mu, double tau, const CarFactor<double>& factor, Rng& rng) {
  if (!factor.ok()) throw std::runtime_error("CAR precision is not positive definite");
  const Eigen::VectorXd z = std_normal_vector(factor.precision().rows(), rng);
  // Q = L L' so L'^{-1} z has covariance Q^{-1}.
  const Eigen::VectorXd x = factor.llt().matrixU().solve(z);
  return (tau * x).array() + mu;
}

}  // namespace womble
